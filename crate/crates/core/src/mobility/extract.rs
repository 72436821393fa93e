//! Rotation-averaged centre paths from raw tip trajectories.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::MobilityError;
use crate::driftlaw::{DriftPath, DriftSample};
use crate::solver::{time_average as window_mean, TipSample};

/// Duration and mean tip position of one completed rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationPeriod {
    /// Midpoint of the rotation.
    pub t: f64,
    pub period: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftExtraction {
    pub path: DriftPath,
    pub rotations: Vec<RotationPeriod>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractSettings {
    /// Largest relative change between successive rotation periods.
    pub max_jitter: f64,
    pub min_rotations: f64,
    /// Keep every `stride`-th window centre.
    pub stride: usize,
}

impl Default for ExtractSettings {
    fn default() -> Self {
        Self {
            max_jitter: 0.05,
            min_rotations: 3.0,
            stride: 1,
        }
    }
}

/// Least-squares slope of phase against time over `[t0, t1]`.
fn phase_slope(s: &[TipSample], t0: f64, t1: f64) -> Option<f64> {
    let lo = s.partition_point(|p| p.t < t0);
    let hi = s.partition_point(|p| p.t <= t1);
    let w = &s[lo..hi];
    if w.len() < 3 {
        return None;
    }
    let n = w.len() as f64;
    let mt = w.iter().map(|p| p.t).sum::<f64>() / n;
    let mp = w.iter().map(|p| p.phase).sum::<f64>() / n;
    let (mut stp, mut stt) = (0.0, 0.0);
    for p in w {
        stp += (p.t - mt) * (p.phase - mp);
        stt += (p.t - mt) * (p.t - mt);
    }
    Some(stp / stt)
}

/// Time at which the phase, measured from the first sample along the
/// rotation direction, first reaches `target`.
fn phase_time(s: &[TipSample], dir: f64, target: f64) -> Option<f64> {
    let p0 = s[0].phase;
    s.windows(2).find_map(|w| {
        let (a, b) = (dir * (w[0].phase - p0), dir * (w[1].phase - p0));
        (a < target && b >= target).then(|| w[0].t + (target - a) / (b - a) * (w[1].t - w[0].t))
    })
}

/// Slides a window of one instantaneous period along the tip samples and
/// averages the tip position over it. The period of each window comes from
/// a linear fit to the unwrapped phase inside it.
pub fn extract_drift(
    samples: &[TipSample],
    settings: &ExtractSettings,
) -> Result<DriftExtraction, MobilityError> {
    if samples.len() < 4 {
        return Err(MobilityError::TooFewRotations(0.0));
    }
    let s = samples;
    let (first, last) = (s[0], s[s.len() - 1]);
    let turns = (last.phase - first.phase).abs() / TAU;
    if turns < settings.min_rotations {
        return Err(MobilityError::TooFewRotations(turns));
    }
    let dir = (last.phase - first.phase).signum();

    let mut rotations = Vec::new();
    let mut bounds = vec![first.t];
    let mut m = 1.0;
    while let Some(t) = phase_time(s, dir, m * TAU) {
        bounds.push(t);
        m += 1.0;
    }
    for w in bounds.windows(2) {
        let omega = phase_slope(s, w[0], w[1]).map(f64::abs).unwrap_or(f64::NAN);
        let (x, y) = window_mean(s, w[0], w[1]);
        rotations.push(RotationPeriod {
            t: 0.5 * (w[0] + w[1]),
            period: TAU / omega,
            x,
            y,
        });
    }
    for (k, w) in rotations.windows(2).enumerate() {
        let jitter = (w[1].period - w[0].period).abs() / w[0].period;
        if !(jitter <= settings.max_jitter) {
            return Err(MobilityError::UnstablePeriod {
                rotation: k + 1,
                jitter,
            });
        }
    }

    let mut period = TAU / phase_slope(s, first.t, last.t).unwrap().abs();
    let mut out = Vec::new();
    for p in s.iter().step_by(settings.stride.max(1)) {
        if p.t - 0.5 * period < first.t {
            continue;
        }
        if p.t + 0.5 * period > last.t {
            break;
        }
        for _ in 0..3 {
            let Some(w) = phase_slope(s, p.t - 0.5 * period, p.t + 0.5 * period) else {
                break;
            };
            period = TAU / w.abs();
        }
        let (t0, t1) = (p.t - 0.5 * period, p.t + 0.5 * period);
        if t0 < first.t || t1 > last.t {
            continue;
        }
        let (x, y) = window_mean(s, t0, t1);
        out.push(DriftSample { t: p.t, x, y });
    }
    Ok(DriftExtraction {
        path: DriftPath::observed(out),
        rotations,
    })
}

/// Resamples a path at a fixed time spacing by linear interpolation.
pub fn resample(path: &DriftPath, dt: f64) -> DriftPath {
    let s = &path.samples;
    let mut out = Vec::new();
    if s.len() < 2 || dt <= 0.0 {
        return DriftPath {
            samples: s.clone(),
            ..path.clone()
        };
    }
    let (t0, t1) = (s[0].t, s[s.len() - 1].t);
    let n = ((t1 - t0) / dt + 1e-9).floor() as usize;
    let mut k = 0;
    for m in 0..=n {
        let t = t0 + m as f64 * dt;
        while k + 2 < s.len() && s[k + 1].t < t {
            k += 1;
        }
        let (a, b) = (s[k], s[k + 1]);
        let f = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        out.push(DriftSample {
            t,
            x: a.x + f * (b.x - a.x),
            y: a.y + f * (b.y - a.y),
        });
    }
    DriftPath {
        samples: out,
        ..path.clone()
    }
}
