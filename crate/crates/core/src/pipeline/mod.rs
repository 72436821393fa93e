//! End-to-end experiments: seed, simulate, extract the drift, fit the
//! coefficients, predict and compare, with every artifact written to a
//! bundle directory.

mod bundle;
mod compare;
mod io;
mod manifest;

pub use bundle::{
    read_summary, run_pipeline, CheckResult, PipelineOptions, PipelineOutcome, PipelineResults,
    PipelineSummary, StageRecord, StageStatus,
};
pub use compare::{compare_trajectories, DeviationReport};
pub use io::{read_path_csv, read_tips_csv};
pub use manifest::{
    canonical_manifest, canonical_manifests, AnalysisSettings, ConfigRef, Expectations,
    ExperimentManifest, RadialDrift, ReferenceCoefficients,
};

use crate::driftlaw::DriftError;
use crate::grid::GridIoError;
use crate::mobility::MobilityError;
use crate::solver::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("observed and predicted paths share no time range")]
    NonOverlapping,
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Grid(#[from] GridIoError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
