//! Explicit finite-difference evolution of Barkley kinetics on the diffusion
//! metric, spiral seeding and tip tracking.

mod experiment;
mod kinetics;
mod seed;
mod state;
mod stencil;
mod tip;

pub use experiment::{continue_run, run_experiment, ExperimentConfig, ExperimentRun, SeedSummary};
pub use kinetics::BarkleyKinetics;
pub use seed::{
    cross_field, place_seed, planar_metric, planar_seed, seed_spiral, shift_state, PlanarSeed,
    SeedSettings, Seeded,
};
pub use state::{max_time_step, Simulation, SpiralState};
pub use stencil::{build_stencil, build_stencil_with, slot, HalfNodeRule, StencilTable};
pub use tip::{
    time_average, tip_candidates, track_tip, track_tip_near, TipPoint, TipSample, TipTrajectory,
    TrackingStatus,
};

use crate::geometry::GeometryError;
use crate::grid::GridIoError;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("state grid does not match the stencil grid")]
    GridMismatch,
    #[error("non-finite value at node ({i}, {j}) at t = {t}")]
    NonFinite { i: usize, j: usize, t: f64 },
    #[error("{0} tip candidates and no previous tip to disambiguate")]
    AmbiguousTip(usize),
    #[error("seeding failed: {0}")]
    SeedFailed(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] GridIoError),
}
