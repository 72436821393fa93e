//! Diffusion-induced metric, Christoffel symbols and Ricci curvature scalar
//! for a graph surface `z = f(x, y)` carrying a projected fiber field.

mod curvature;
mod decomposition;
pub mod finite_diff;
mod frame;
mod surface;
pub mod taylor;

pub use curvature::{
    christoffel_and_ricci, curvature_at, levi_civita, Christoffel, DerivativeMode, MetricField,
    PointCurvature,
};
pub use decomposition::{ricci_decomposition, RicciDecomposition};
pub use frame::{
    diffusion_tensor_3d, fiber_frame, induced_metric, surface_metric, FiberFrame, InducedMetric,
    Sym2, Vec3,
};
pub use surface::{
    FiberAngle, FiberConfig, Shape, ShapeConfig, SurfaceConfig, SurfaceSpec, Tabulated,
};

pub(crate) use frame::{cross, dot};

use crate::grid::GridIoError;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid surface specification: {0}")]
    InvalidSpec(String),
    #[error("degenerate fiber frame at ({x}, {y}): non-finite shape slope")]
    DegenerateFrame { x: f64, y: f64 },
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("closed-form derivatives requested for a tabulated surface")]
    NotAnalytic,
    #[error(transparent)]
    Io(#[from] GridIoError),
}
