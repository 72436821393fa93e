//! Local fiber frame, 3D diffusion tensor and the induced surface metric.

use serde::{Deserialize, Serialize};

use super::taylor::Real;
use super::{GeometryError, SurfaceSpec};

pub type Vec3 = [f64; 3];

/// Orthonormal frame at a surface point: fiber, cross-fiber, normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberFrame {
    pub e_l: Vec3,
    pub e_t: Vec3,
    pub e_n: Vec3,
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Unit fiber vector `N [cos α, sin α, cos α ∂ₓf + sin α ∂ᵧf]`.
pub fn fiber_vector<T: Real>(fx: T, fy: T, alpha: T) -> [T; 3] {
    let (c, s) = (alpha.cos(), alpha.sin());
    let z = c * fx + s * fy;
    let norm = (c * c + s * s + z * z).sqrt();
    [c / norm, s / norm, z / norm]
}

/// Unit normal with positive `z` component.
pub fn normal_vector<T: Real>(fx: T, fy: T) -> [T; 3] {
    let norm = (T::cst(1.0) + fx * fx + fy * fy).sqrt();
    [-fx / norm, -fy / norm, T::cst(1.0) / norm]
}

pub fn fiber_frame(spec: &SurfaceSpec, x: f64, y: f64) -> Result<FiberFrame, GeometryError> {
    let (fx, fy) = spec.slopes_at(x, y)?;
    let alpha = spec.angle_at(x, y)?;
    let e_l = fiber_vector(fx, fy, alpha);
    let e_n = normal_vector(fx, fy);
    let e_t = cross(e_n, e_l);
    Ok(FiberFrame { e_l, e_t, e_n })
}

/// `D^{ij} = D_T δ^{ij} + (D_L − D_T) e_L^i e_L^j` in physical units.
pub fn diffusion_tensor_3d(
    spec: &SurfaceSpec,
    x: f64,
    y: f64,
) -> Result<[[f64; 3]; 3], GeometryError> {
    let frame = fiber_frame(spec, x, y)?;
    let dl = spec.d_l * spec.d0;
    let dt = spec.d_t * spec.d0;
    let e = frame.e_l;
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = (dl - dt) * e[i] * e[j] + if i == j { dt } else { 0.0 };
        }
    }
    Ok(d)
}

/// Symmetric 2×2 tensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 {
        xx: 1.0,
        xy: 0.0,
        yy: 1.0,
    };

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 {
            xx: self.yy / d,
            xy: -self.xy / d,
            yy: self.xx / d,
        }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    pub fn scale(&self, k: f64) -> Sym2 {
        Sym2 {
            xx: k * self.xx,
            xy: k * self.xy,
            yy: k * self.yy,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0
    }
}

/// Covariant surface metric `(g₁₁, g₁₂, g₂₂)` in the chart `s¹ = x, s² = y`.
///
/// The ambient metric is `g_ij = (1/d_T) δ_ij + (1/d_L − 1/d_T) e_L,i e_L,j`
/// (the scaled inverse of the 3D diffusion tensor), pulled back along the
/// tangent vectors `(1, 0, ∂ₓf)` and `(0, 1, ∂ᵧf)`.
pub fn surface_metric<T: Real>(fx: T, fy: T, alpha: T, d_l: f64, d_t: f64) -> [T; 3] {
    let e = fiber_vector(fx, fy, alpha);
    let iso = T::cst(1.0 / d_t);
    let k = T::cst(1.0 / d_l - 1.0 / d_t);
    let g = |i: usize, j: usize| {
        let base = k * e[i] * e[j];
        if i == j {
            base + iso
        } else {
            base
        }
    };
    let two = T::cst(2.0);
    let g11 = g(0, 0) + two * g(0, 2) * fx + g(2, 2) * fx * fx;
    let g22 = g(1, 1) + two * g(1, 2) * fy + g(2, 2) * fy * fy;
    let g12 = g(0, 1) + g(0, 2) * fy + g(1, 2) * fx + g(2, 2) * fx * fy;
    [g11, g12, g22]
}

/// Metric, its inverse and `√g` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InducedMetric {
    pub lower: Sym2,
    pub upper: Sym2,
    pub sqrt_g: f64,
}

impl InducedMetric {
    pub fn from_lower(lower: Sym2) -> Self {
        assert!(
            lower.is_positive_definite(),
            "surface metric is not positive definite: {lower:?}"
        );
        Self {
            lower,
            upper: lower.inverse(),
            sqrt_g: lower.det().sqrt(),
        }
    }
}

pub fn induced_metric(spec: &SurfaceSpec, x: f64, y: f64) -> Result<InducedMetric, GeometryError> {
    let (fx, fy) = spec.slopes_at(x, y)?;
    let alpha = spec.angle_at(x, y)?;
    let [g11, g12, g22] = surface_metric(fx, fy, alpha, spec.d_l, spec.d_t);
    Ok(InducedMetric::from_lower(Sym2 {
        xx: g11,
        xy: g12,
        yy: g22,
    }))
}
