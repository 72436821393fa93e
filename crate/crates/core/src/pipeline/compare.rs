//! Deviation between an observed and a predicted centre path.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::driftlaw::{DriftPath, DriftSample};

/// Nearest-point distances from the observed path to the predicted one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub max: f64,
    /// Arc-length weighted mean.
    pub mean: f64,
    /// Arc-length weighted root mean square.
    pub rms: f64,
    /// Distance between the last observed point and the prediction at the
    /// same time.
    pub terminal: f64,
    pub samples: usize,
    pub observed_arc_length: f64,
}

fn point_segment(p: (f64, f64), a: DriftSample, b: DriftSample) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (((p.0 - a.x) * dx + (p.1 - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.x - s * dx).hypot(p.1 - a.y - s * dy)
}

fn at_time(s: &[DriftSample], t: f64) -> (f64, f64) {
    let k = s.partition_point(|p| p.t <= t).clamp(1, s.len().max(2) - 1);
    if s.len() == 1 {
        return (s[0].x, s[0].y);
    }
    let (a, b) = (s[k - 1], s[k]);
    let f = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
    (a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))
}

/// Compares the observed samples that fall inside the predicted time range
/// against the predicted polyline.
pub fn compare_trajectories(
    observed: &DriftPath,
    predicted: &DriftPath,
) -> Result<DeviationReport, PipelineError> {
    let (o, p) = (&observed.samples, &predicted.samples);
    if o.is_empty() || p.is_empty() {
        return Err(PipelineError::NonOverlapping);
    }
    let (p0, p1) = (p[0].t, p[p.len() - 1].t);
    let slack = 1e-9 * (1.0 + p1.abs());
    let used: Vec<DriftSample> = o
        .iter()
        .copied()
        .filter(|s| s.t >= p0 - slack && s.t <= p1 + slack)
        .collect();
    if used.is_empty() {
        return Err(PipelineError::NonOverlapping);
    }
    let dist: Vec<f64> = used
        .iter()
        .map(|s| {
            if p.len() == 1 {
                (s.x - p[0].x).hypot(s.y - p[0].y)
            } else {
                p.windows(2)
                    .map(|w| point_segment((s.x, s.y), w[0], w[1]))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    let seg: Vec<f64> = used
        .windows(2)
        .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
        .collect();
    let arc: f64 = seg.iter().sum();
    let (mean, rms) = if arc > 0.0 {
        let m = seg
            .iter()
            .enumerate()
            .map(|(k, l)| 0.5 * (dist[k] + dist[k + 1]) * l)
            .sum::<f64>();
        let q = seg
            .iter()
            .enumerate()
            .map(|(k, l)| 0.5 * (dist[k] * dist[k] + dist[k + 1] * dist[k + 1]) * l)
            .sum::<f64>();
        (m / arc, (q / arc).sqrt())
    } else {
        let n = dist.len() as f64;
        (
            dist.iter().sum::<f64>() / n,
            (dist.iter().map(|d| d * d).sum::<f64>() / n).sqrt(),
        )
    };
    let last = used[used.len() - 1];
    let (px, py) = at_time(p, last.t);
    Ok(DeviationReport {
        max: dist.iter().cloned().fold(0.0, f64::max),
        mean,
        rms,
        terminal: (last.x - px).hypot(last.y - py),
        samples: used.len(),
        observed_arc_length: arc,
    })
}
