//! Barkley reaction kinetics.

use serde::{Deserialize, Serialize};

use super::SolverError;

/// `f(u, v) = ε⁻¹ u (1 − u)(u − (v + b)/a)`, `g(u, v) = u − v`, with
/// diffusion weights `D_u`, `D_v` on the two fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarkleyKinetics {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    #[serde(rename = "D_u", default = "one")]
    pub d_u: f64,
    #[serde(rename = "D_v")]
    pub d_v: f64,
}

fn one() -> f64 {
    1.0
}

impl BarkleyKinetics {
    pub fn new(a: f64, b: f64, eps: f64, d_v: f64) -> Result<Self, SolverError> {
        let k = Self {
            a,
            b,
            eps,
            d_u: 1.0,
            d_v,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let ok = self.a > 0.0
            && self.eps > 0.0
            && self.b.is_finite()
            && self.d_u >= 0.0
            && self.d_v >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidConfig(format!(
                "invalid kinetics parameters {self:?}"
            )))
        }
    }

    #[inline(always)]
    pub fn f(&self, u: f64, v: f64) -> f64 {
        u * (1.0 - u) * (u - (v + self.b) * (1.0 / self.a)) * (1.0 / self.eps)
    }

    #[inline(always)]
    pub fn g(&self, u: f64, v: f64) -> f64 {
        u - v
    }

    /// `v` on the `f`-nullcline branch at `u = 1/2`.
    pub fn tip_v_level(&self) -> f64 {
        self.a / 2.0 - self.b
    }
}
