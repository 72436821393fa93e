//! Readers for the tip and centre-path CSV files.

use std::path::Path;

use super::PipelineError;
use crate::driftlaw::{DriftPath, DriftSample};
use crate::solver::TipSample;

/// Reads `t,x,y,phase[,...]` rows; extra columns are ignored.
pub fn read_tips_csv(path: &Path) -> Result<Vec<TipSample>, PipelineError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<TipSample>, _>>()?;
    check_order(rows.iter().map(|s| s.t))?;
    Ok(rows)
}

/// Reads `t,x,y` rows as an observed path.
pub fn read_path_csv(path: &Path) -> Result<DriftPath, PipelineError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<DriftSample>, _>>()?;
    check_order(rows.iter().map(|s| s.t))?;
    Ok(DriftPath::observed(rows))
}

fn check_order(mut t: impl Iterator<Item = f64>) -> Result<(), PipelineError> {
    let Some(mut prev) = t.next() else {
        return Ok(());
    };
    for x in t {
        if !(x > prev) {
            return Err(PipelineError::Manifest(format!(
                "times must increase strictly, found {x} after {prev}"
            )));
        }
        prev = x;
    }
    Ok(())
}
