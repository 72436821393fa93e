//! Drift velocity `Ẋ^A = −q1 g^AB ∂_B𝓡 − q2 g^{−1/2} ε^BA ∂_B𝓡` with
//! `ε¹² = +1` in the `(x, y)` chart.

use super::{DriftError, MobilityCoefficients};
use crate::geometry::finite_diff::bicubic;
use crate::geometry::{
    cross, curvature_at, dot, fiber_frame, DerivativeMode, FiberFrame, InducedMetric, MetricField,
    SurfaceSpec, Sym2, Vec3,
};

/// Curvature scalar, its chart gradient and the metric at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalCurvature {
    pub ricci: f64,
    pub gradient: [f64; 2],
    pub metric: InducedMetric,
}

/// A geometry on which the drift law can be evaluated.
pub trait CurvatureSource: Sync {
    fn local(&self, x: f64, y: f64) -> Result<LocalCurvature, DriftError>;
    fn contains(&self, x: f64, y: f64) -> bool;
}

impl CurvatureSource for SurfaceSpec {
    fn local(&self, x: f64, y: f64) -> Result<LocalCurvature, DriftError> {
        if !self.contains(x, y) {
            return Err(DriftError::OutsideDomain { x, y });
        }
        let p = curvature_at(self, x, y, true)?;
        Ok(LocalCurvature {
            ricci: p.ricci,
            gradient: p.ricci_gradient.expect("gradient requested"),
            metric: p.metric,
        })
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.grid().contains(x, y)
    }
}

/// Closed-form evaluation for analytic surfaces sampled analytically,
/// bicubic interpolation of the node fields otherwise.
impl CurvatureSource for MetricField {
    fn local(&self, x: f64, y: f64) -> Result<LocalCurvature, DriftError> {
        if !self.grid.contains(x, y) {
            return Err(DriftError::OutsideDomain { x, y });
        }
        if self.mode == DerivativeMode::Analytic && self.spec.is_analytic() {
            return self.spec.local(x, y);
        }
        let (ricci, gradient) = bicubic(&self.grid, &self.ricci, x, y);
        let comp = |f: fn(&Sym2) -> f64| {
            let v: Vec<f64> = self.lower.iter().map(f).collect();
            bicubic(&self.grid, &v, x, y).0
        };
        let lower = Sym2 {
            xx: comp(|s| s.xx),
            xy: comp(|s| s.xy),
            yy: comp(|s| s.yy),
        };
        Ok(LocalCurvature {
            ricci,
            gradient,
            metric: InducedMetric::from_lower(lower),
        })
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.grid.contains(x, y)
    }
}

/// Chart velocity from the index form.
pub fn eom_velocity(
    source: &dyn CurvatureSource,
    x: f64,
    y: f64,
    q: &MobilityCoefficients,
) -> Result<[f64; 2], DriftError> {
    let l = source.local(x, y)?;
    Ok(velocity_from(&l, q))
}

pub(crate) fn velocity_from(l: &LocalCurvature, q: &MobilityCoefficients) -> [f64; 2] {
    let [r1, r2] = l.gradient;
    let up = l.metric.upper.apply(l.gradient);
    // ε^{BA} ∂_B𝓡 for A = 1, 2 is (−∂₂𝓡, ∂₁𝓡).
    let inv_sqrt_g = 1.0 / l.metric.sqrt_g;
    [
        -q.q1 * up[0] - q.q2 * inv_sqrt_g * -r2,
        -q.q1 * up[1] - q.q2 * inv_sqrt_g * r1,
    ]
}

/// Gradient of a scalar on the isotropic surface, as a 3-vector, from its
/// chart gradient and the shape slopes.
pub fn isotropic_gradient(chart_gradient: [f64; 2], fx: f64, fy: f64) -> Vec3 {
    let big = Sym2 {
        xx: 1.0 + fx * fx,
        xy: fx * fy,
        yy: 1.0 + fy * fy,
    };
    let [c1, c2] = big.inverse().apply(chart_gradient);
    [c1, c2, c1 * fx + c2 * fy]
}

/// Chart velocity from the fiber-frame form
/// `−q1 [d_L e_L (e_L·∇𝓡) + d_T e_T (e_T·∇𝓡)] − q2 √(d_L d_T) e_N × ∇𝓡`,
/// with `∇𝓡` the isotropic surface gradient.
pub fn eom_velocity_fiber_form(
    frame: &FiberFrame,
    grad: Vec3,
    d_l: f64,
    d_t: f64,
    q: &MobilityCoefficients,
) -> [f64; 2] {
    let (gl, gt) = (dot(frame.e_l, grad), dot(frame.e_t, grad));
    let rot = cross(frame.e_n, grad);
    let s = (d_l * d_t).sqrt();
    let v =
        |k: usize| -q.q1 * (d_l * frame.e_l[k] * gl + d_t * frame.e_t[k] * gt) - q.q2 * s * rot[k];
    // Chart components of a tangent vector are its x and y components.
    [v(0), v(1)]
}

/// Fiber-form velocity on an analytic surface.
pub fn fiber_form_at(
    spec: &SurfaceSpec,
    x: f64,
    y: f64,
    q: &MobilityCoefficients,
) -> Result<[f64; 2], DriftError> {
    let l = spec.local(x, y)?;
    let (fx, fy) = spec.slopes_at(x, y)?;
    let frame = fiber_frame(spec, x, y)?;
    Ok(eom_velocity_fiber_form(
        &frame,
        isotropic_gradient(l.gradient, fx, fy),
        spec.d_l,
        spec.d_t,
        q,
    ))
}
