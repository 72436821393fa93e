//! Closed-form drift trajectories on the isotropic paraboloid and on the
//! plane with fiber angle `α = B z`, `z = x + y`.

use super::DriftError;

fn ratio(q1: f64, q2: f64) -> Result<f64, DriftError> {
    if q1 == 0.0 {
        return Err(DriftError::SpecialCase(
            "q1 = 0: purely transverse drift along level sets of the curvature",
        ));
    }
    Ok(q2 / q1)
}

/// Polar angle on the paraboloid `z = ±A r²`:
/// `φ(r) = (q2/q1)(s − arcoth s) + C1` with `s = √(1 + 4A²r²)`.
pub fn paraboloid_trajectory(r: f64, a: f64, q1: f64, q2: f64, c1: f64) -> Result<f64, DriftError> {
    let k = ratio(q1, q2)?;
    if a == 0.0 {
        return Err(DriftError::SpecialCase(
            "A = 0: flat plane, no curvature gradient",
        ));
    }
    if r <= 0.0 {
        return Err(DriftError::SpecialCase("r = 0: the apex is a fixed point"));
    }
    let s = (1.0 + 4.0 * a * a * r * r).sqrt();
    // arcoth s = ½ ln((s + 1)/(s − 1)) with s − 1 = 4A²r²/(s + 1).
    let arcoth = 0.5 * ((s + 1.0) * (s + 1.0) / (4.0 * a * a * r * r)).ln();
    Ok(k * (s - arcoth) + c1)
}

/// `dφ/dr = (q2/q1) √(1 + 4A²r²) / r`.
pub fn paraboloid_slope(r: f64, a: f64, q1: f64, q2: f64) -> Result<f64, DriftError> {
    Ok(ratio(q1, q2)? * (1.0 + 4.0 * a * a * r * r).sqrt() / r)
}

/// `C1` such that the trajectory passes through polar point `(r0, φ0)`.
pub fn paraboloid_constant(
    r0: f64,
    phi0: f64,
    a: f64,
    q1: f64,
    q2: f64,
) -> Result<f64, DriftError> {
    Ok(phi0 - paraboloid_trajectory(r0, a, q1, q2, 0.0)?)
}

/// `arctan(((d_L + d_T) tan α + (d_L − d_T)) / (2√(d_L d_T)))`, continued
/// across the poles of `tan α` so that it is continuous and increasing in α.
fn unwrapped_arctan(alpha: f64, d_l: f64, d_t: f64) -> f64 {
    let k = (alpha / std::f64::consts::PI).round();
    let a = alpha - k * std::f64::consts::PI;
    let s = 2.0 * (d_l * d_t).sqrt();
    let c = a.cos();
    // atan2 keeps a = ±π/2 finite: the argument tends to ±∞ there.
    ((d_l + d_t) * a.sin() + (d_l - d_t) * c).atan2(s * c) + k * std::f64::consts::PI
}

/// `w = x − y` on the drift trajectory as a function of `z = x + y`:
/// `W(z) = ln[(d_L − d_T) sin 2α + d_L + d_T]/(2B) − (q2/(q1 B)) arctan(…) + C2`.
pub fn planar_w(
    z: f64,
    b: f64,
    d_l: f64,
    d_t: f64,
    q1: f64,
    q2: f64,
    c2: f64,
) -> Result<f64, DriftError> {
    let k = ratio(q1, q2)?;
    if b == 0.0 {
        return Err(DriftError::SpecialCase(
            "B = 0: uniform fibers, no curvature gradient",
        ));
    }
    let alpha = b * z;
    let den = (d_l - d_t) * (2.0 * alpha).sin() + d_l + d_t;
    Ok(den.ln() / (2.0 * b) - k / b * unwrapped_arctan(alpha, d_l, d_t) + c2)
}

/// `dW/dz = [(d_L − d_T) cos 2α − 2 (q2/q1) √(d_L d_T)] / [d_L + d_T + (d_L − d_T) sin 2α]`.
pub fn planar_slope(
    z: f64,
    b: f64,
    d_l: f64,
    d_t: f64,
    q1: f64,
    q2: f64,
) -> Result<f64, DriftError> {
    let k = ratio(q1, q2)?;
    let alpha = b * z;
    let den = d_l + d_t + (d_l - d_t) * (2.0 * alpha).sin();
    Ok(((d_l - d_t) * (2.0 * alpha).cos() - 2.0 * k * (d_l * d_t).sqrt()) / den)
}

/// Chart point `((z + W)/2, (z − W)/2)` on the planar trajectory.
pub fn planar_trajectory(
    z: f64,
    b: f64,
    d_l: f64,
    d_t: f64,
    q1: f64,
    q2: f64,
    c2: f64,
) -> Result<(f64, f64), DriftError> {
    let w = planar_w(z, b, d_l, d_t, q1, q2, c2)?;
    Ok(((z + w) / 2.0, (z - w) / 2.0))
}

/// `C2` such that the trajectory passes through `(x0, y0)`.
pub fn planar_constant(
    x0: f64,
    y0: f64,
    b: f64,
    d_l: f64,
    d_t: f64,
    q1: f64,
    q2: f64,
) -> Result<f64, DriftError> {
    Ok(x0 - y0 - planar_w(x0 + y0, b, d_l, d_t, q1, q2, 0.0)?)
}
