//! Drift extraction from tip trajectories, regression of the mobility
//! coefficients and overlap integrals with external response functions.

mod extract;
mod fit;
mod response;
mod source;

pub use extract::{extract_drift, resample, DriftExtraction, ExtractSettings, RotationPeriod};
pub use fit::{fit_mobility, fit_q0, FrequencyFit, MobilityFit};
pub use response::{BiorthogonalityReport, PolarField, PolarGrid, ResponseFunctionSet, ValueType};
pub use rustfft::num_complex::Complex64;
pub use source::{overlap_integrals, source_terms, OverlapCoefficients, SourceTermFields};

use crate::driftlaw::DriftError;

#[derive(Debug, thiserror::Error)]
pub enum MobilityError {
    #[error("trajectory covers {0:.2} rotations, at least 3 are needed")]
    TooFewRotations(f64),
    #[error("rotation period jumps by {:.1}% at rotation {rotation}", jitter * 100.0)]
    UnstablePeriod { rotation: usize, jitter: f64 },
    #[error("degenerate regression: {0}")]
    RankDeficient(String),
    #[error("curvature spread {spread:.3e} is below 10% of its magnitude {max_abs:.3e}")]
    InsufficientVariation { spread: f64, max_abs: f64 },
    #[error("fields live on different polar grids")]
    GridMismatch,
    #[error("response-function file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Drift(#[from] DriftError),
}
