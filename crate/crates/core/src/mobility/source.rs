//! Curvature source terms on the polar grid and their overlaps with the
//! response functions.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::response::{PolarField, PolarGrid, ResponseFunctionSet};
use super::MobilityError;

/// `S^R` and the pair `S^dR_1`, `S^dR_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceTermFields {
    pub s_r: PolarField,
    pub s_dr: [PolarField; 2],
    /// Largest outer-ring magnitude relative to the field maximum, over the
    /// three fields.
    pub edge_ratio: f64,
}

impl SourceTermFields {
    /// Localised sources stay below 1% of their peak on the outer ring.
    pub fn is_localized(&self) -> bool {
        self.edge_ratio <= 0.01
    }
}

/// First and second `θ` derivatives by FFT, ring by ring.
fn theta_derivatives(g: PolarGrid, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = g.n_theta;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let (mut d1, mut d2) = (
        vec![Complex64::default(); f.len()],
        vec![Complex64::default(); f.len()],
    );
    let mut ring = vec![Complex64::default(); n];
    let mut a = vec![Complex64::default(); n];
    let mut b = vec![Complex64::default(); n];
    for i in 0..g.n_r {
        ring.copy_from_slice(&f[i * n..(i + 1) * n]);
        fwd.process(&mut ring);
        for k in 0..n {
            let m = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            // The Nyquist mode has no odd derivative on a real grid.
            let m1 = if 2 * k == n { 0.0 } else { m };
            a[k] = ring[k] * Complex64::new(0.0, m1) / n as f64;
            b[k] = ring[k] * (-m * m) / n as f64;
        }
        inv.process(&mut a);
        inv.process(&mut b);
        d1[i * n..(i + 1) * n].copy_from_slice(&a);
        d2[i * n..(i + 1) * n].copy_from_slice(&b);
    }
    (d1, d2)
}

/// `∂_r` by fourth-order differences, one-sided at both ends of each ray.
fn radial_derivative(g: PolarGrid, f: &[Complex64]) -> Vec<Complex64> {
    let (nr, nt) = (g.n_r, g.n_theta);
    let h12 = 12.0 * g.dr();
    let mut out = vec![Complex64::default(); f.len()];
    for j in 0..nt {
        let v = |i: usize| f[i * nt + j];
        for i in 0..nr {
            let d = if i == 0 {
                -25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)
            } else if i == 1 {
                -3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4)
            } else if i == nr - 2 {
                3.0 * v(nr - 1) + 10.0 * v(nr - 2) - 18.0 * v(nr - 3) + 6.0 * v(nr - 4) - v(nr - 5)
            } else if i == nr - 1 {
                25.0 * v(nr - 1) - 48.0 * v(nr - 2) + 36.0 * v(nr - 3) - 16.0 * v(nr - 4)
                    + 3.0 * v(nr - 5)
            } else {
                -v(i + 2) + 8.0 * v(i + 1) - 8.0 * v(i - 1) + v(i - 2)
            };
            out[i * nt + j] = d / h12;
        }
    }
    out
}

/// `S^R = (P̂∂²_θu0 − P̂ r∂_r u0)/6` and
/// `S^dR_A = −P̂ρ_A r∂_r u0/6 + P̂ρ_A ∂²_θu0/12 + P̂ r²∂_A u0/24`
/// with `ρ = (r cos θ, r sin θ)` and `P̂ = diag(p_hat)`.
pub fn source_terms(u0: &PolarField, p_hat: &[f64]) -> Result<SourceTermFields, MobilityError> {
    if p_hat.len() != u0.components.len() {
        return Err(MobilityError::GridMismatch);
    }
    let g = u0.grid;
    let nc = p_hat.len();
    let mut s_r = PolarField::zeros(g, nc);
    let mut s_dr = [PolarField::zeros(g, nc), PolarField::zeros(g, nc)];
    for (c, &p) in p_hat.iter().enumerate() {
        let f = &u0.components[c];
        let (dt1, dt2) = theta_derivatives(g, f);
        let dr = radial_derivative(g, f);
        for i in 0..g.n_r {
            let r = g.r(i);
            for j in 0..g.n_theta {
                let k = g.index(i, j);
                let (s, co) = g.theta(j).sin_cos();
                let rdr = dr[k] * r;
                s_r.components[c][k] = (dt2[k] - rdr) * (p / 6.0);
                let r2dx = dr[k] * (r * r * co) - dt1[k] * (r * s);
                let r2dy = dr[k] * (r * r * s) + dt1[k] * (r * co);
                for (a, (rho, r2d)) in [(r * co, r2dx), (r * s, r2dy)].into_iter().enumerate() {
                    s_dr[a].components[c][k] =
                        (rdr * (-rho / 6.0) + dt2[k] * (rho / 12.0) + r2d / 24.0) * p;
                }
            }
        }
    }
    let ratio = |f: &PolarField| {
        let m = f.max_abs();
        if m > 0.0 {
            f.edge_max_abs() / m
        } else {
            0.0
        }
    };
    let edge_ratio = ratio(&s_r).max(ratio(&s_dr[0])).max(ratio(&s_dr[1]));
    Ok(SourceTermFields {
        s_r,
        s_dr,
        edge_ratio,
    })
}

/// Coefficients from the overlap integrals, with the imaginary parts that a
/// consistent data set leaves near zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapCoefficients {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub imaginary: [f64; 3],
}

/// `q0 = ⟨Y^θ|S^R⟩`, `q1 = ½⟨Y^A|S^dR_A⟩`, `q2 = ½ε^A_B⟨Y^B|S^dR_A⟩`
/// with `ε^1_2 = +1`.
pub fn overlap_integrals(
    rf: &ResponseFunctionSet,
    src: &SourceTermFields,
) -> Result<OverlapCoefficients, MobilityError> {
    if rf.grid != src.s_r.grid {
        return Err(MobilityError::GridMismatch);
    }
    let q0 = rf.y_theta.inner(&src.s_r)?;
    let xx = rf.y_x.inner(&src.s_dr[0])?;
    let yy = rf.y_y.inner(&src.s_dr[1])?;
    let yx = rf.y_y.inner(&src.s_dr[0])?;
    let xy = rf.y_x.inner(&src.s_dr[1])?;
    let q1 = (xx + yy) * 0.5;
    let q2 = (yx - xy) * 0.5;
    Ok(OverlapCoefficients {
        q0: q0.re,
        q1: q1.re,
        q2: q2.re,
        imaginary: [q0.im, q1.im, q2.im],
    })
}
