//! Curvature-gradient drift law: velocity field, path integration and the
//! closed-form trajectories on the two analytic geometries.

mod closed_form;
mod eom;
mod integrate;

pub use closed_form::{
    paraboloid_constant, paraboloid_slope, paraboloid_trajectory, planar_constant, planar_slope,
    planar_trajectory, planar_w,
};
pub(crate) use eom::velocity_from;
pub use eom::{
    eom_velocity, eom_velocity_fiber_form, fiber_form_at, isotropic_gradient, CurvatureSource,
    LocalCurvature,
};
pub use integrate::{integrate_drift, DriftPath, DriftSample, IntegratorSettings, PathStatus};

use serde::{Deserialize, Serialize};

use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum DriftError {
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("closed form undefined: {0}")]
    SpecialCase(&'static str),
    #[error("step control did not converge after {0} halvings")]
    NoConvergence(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Drift and frequency coefficients of one kinetics parameter set.
///
/// Frequencies are rotation rates `2π/T > 0` whatever the chirality, so
/// `q0 > 0` means faster rotation where `𝓡 > 0`. `q2` is stored for the
/// stated chirality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityCoefficients {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub omega0: f64,
    /// `+1` counterclockwise, `−1` clockwise.
    pub chirality: i8,
}

impl MobilityCoefficients {
    pub fn drift(q1: f64, q2: f64) -> Self {
        Self {
            q0: 0.0,
            q1,
            q2,
            omega0: 0.0,
            chirality: 1,
        }
    }

    /// Coefficients for the given sense of rotation: `q2` changes sign when
    /// the chirality flips, `q0` and `q1` do not.
    pub fn with_chirality(&self, chirality: i8) -> Self {
        let flip = chirality.signum() != self.chirality.signum();
        Self {
            q2: if flip { -self.q2 } else { self.q2 },
            chirality: chirality.signum(),
            ..*self
        }
    }
}

/// `ω = ω₀ + q₀ 𝓡`.
pub fn rotation_frequency(ricci: f64, q: &MobilityCoefficients) -> f64 {
    q.omega0 + q.q0 * ricci
}
