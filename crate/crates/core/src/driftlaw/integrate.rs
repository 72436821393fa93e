//! Fourth-order Runge–Kutta integration of the drift law.

use serde::{Deserialize, Serialize};

use super::eom::{velocity_from, CurvatureSource};
use super::{DriftError, MobilityCoefficients};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Complete,
    /// Truncated at the last sample before the path left the domain.
    LeftDomain,
}

/// Time-ordered centre positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftPath {
    pub samples: Vec<DriftSample>,
    /// Integrator step, `0` for observed paths.
    pub step: f64,
    /// Integrator order, `0` for observed paths.
    pub order: u8,
    pub status: PathStatus,
}

impl DriftPath {
    pub fn observed(samples: Vec<DriftSample>) -> Self {
        Self {
            samples,
            step: 0.0,
            order: 0,
            status: PathStatus::Complete,
        }
    }

    pub fn last(&self) -> Option<DriftSample> {
        self.samples.last().copied()
    }

    /// Total arc length in the chart.
    pub fn arc_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum()
    }

    /// Columns `t,x,y`, a prefix of the tip trajectory columns.
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "t,x,y")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.t, s.x, s.y)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSettings {
    /// Output interval; the step always divides it.
    pub sample_dt: f64,
    /// Largest step tried first.
    pub initial_step: f64,
    /// Accept once halving the step moves the endpoint by less than this.
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            sample_dt: 1.0,
            initial_step: 1.0,
            tolerance: 1e-8,
            max_halvings: 16,
        }
    }
}

fn rk4_step(
    source: &dyn CurvatureSource,
    q: &MobilityCoefficients,
    p: [f64; 2],
    h: f64,
) -> Result<[f64; 2], DriftError> {
    let f = |p: [f64; 2]| -> Result<[f64; 2], DriftError> {
        Ok(velocity_from(&source.local(p[0], p[1])?, q))
    };
    let k1 = f(p)?;
    let k2 = f([p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]])?;
    let k3 = f([p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]])?;
    let k4 = f([p[0] + h * k3[0], p[1] + h * k3[1]])?;
    let step = |i: usize| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Ok([step(0), step(1)])
}

/// Fixed-step run with `per_sample` steps per output interval.
fn run(
    source: &dyn CurvatureSource,
    q: &MobilityCoefficients,
    start: [f64; 2],
    t_end: f64,
    sample_dt: f64,
    per_sample: u64,
) -> DriftPath {
    let h = sample_dt / per_sample as f64;
    let total = (t_end / h).round() as u64;
    let mut p = start;
    let mut samples = vec![DriftSample {
        t: 0.0,
        x: p[0],
        y: p[1],
    }];
    let mut status = PathStatus::Complete;
    for n in 1..=total {
        match rk4_step(source, q, p, h) {
            Ok(next) if source.contains(next[0], next[1]) => p = next,
            _ => {
                status = PathStatus::LeftDomain;
                break;
            }
        }
        if n % per_sample == 0 || n == total {
            samples.push(DriftSample {
                t: n as f64 * h,
                x: p[0],
                y: p[1],
            });
        }
    }
    DriftPath {
        samples,
        step: h,
        order: 4,
        status,
    }
}

/// Integrates the drift law from `start` over `[0, t_end]`, halving the step
/// until the endpoint moves by less than the tolerance. Paths that leave the
/// domain are truncated and compared at their last common sample.
pub fn integrate_drift(
    source: &dyn CurvatureSource,
    start: [f64; 2],
    t_end: f64,
    q: &MobilityCoefficients,
    settings: &IntegratorSettings,
) -> Result<DriftPath, DriftError> {
    if !source.contains(start[0], start[1]) {
        return Err(DriftError::OutsideDomain {
            x: start[0],
            y: start[1],
        });
    }
    let sample_dt = settings.sample_dt.min(t_end.max(f64::MIN_POSITIVE));
    let mut per_sample = (sample_dt / settings.initial_step).ceil().max(1.0) as u64;
    let mut coarse = run(source, q, start, t_end, sample_dt, per_sample);
    for _ in 0..settings.max_halvings {
        per_sample *= 2;
        let fine = run(source, q, start, t_end, sample_dt, per_sample);
        let n = coarse.samples.len().min(fine.samples.len());
        let (a, b) = (coarse.samples[n - 1], fine.samples[n - 1]);
        if (a.x - b.x).hypot(a.y - b.y) < settings.tolerance {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(DriftError::NoConvergence(settings.max_halvings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FiberConfig, ShapeConfig, SurfaceConfig, SurfaceSpec};

    fn plane() -> SurfaceSpec {
        SurfaceSpec::analytic(SurfaceConfig {
            shape: ShapeConfig::Plane,
            fiber: FiberConfig::Constant { alpha0: 0.3 },
            d_l: 4.0,
            d_t: 1.0,
            d0: 1.0,
            length: 20.0,
            dx: 0.1,
        })
        .unwrap()
    }

    #[test]
    fn zero_gradient_keeps_the_start_point() {
        let p = integrate_drift(
            &plane(),
            [1.5, -2.0],
            50.0,
            &MobilityCoefficients::drift(0.6, 0.4),
            &IntegratorSettings::default(),
        )
        .unwrap();
        assert_eq!(p.status, PathStatus::Complete);
        assert_eq!(p.samples.len(), 51);
        assert!(p.samples.iter().all(|s| s.x == 1.5 && s.y == -2.0));
    }

    #[test]
    fn start_outside_domain_is_rejected() {
        let r = integrate_drift(
            &plane(),
            [11.0, 0.0],
            1.0,
            &MobilityCoefficients::drift(0.6, 0.4),
            &IntegratorSettings::default(),
        );
        assert!(matches!(r, Err(DriftError::OutsideDomain { .. })));
    }
}
