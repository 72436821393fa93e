//! Seeded spiral runs on a configured surface.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::kinetics::BarkleyKinetics;
use super::seed::{seed_spiral, SeedSettings};
use super::state::{max_time_step, Simulation, SpiralState};
use super::stencil::build_stencil;
use super::tip::{track_tip, track_tip_near, TipTrajectory, TrackingStatus};
use super::SolverError;
use crate::geometry::{
    christoffel_and_ricci, DerivativeMode, FiberConfig, MetricField, ShapeConfig, SurfaceConfig,
    SurfaceSpec,
};

fn default_eps() -> f64 {
    0.025
}
fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}
fn ccw() -> i8 {
    1
}
fn two() -> f64 {
    2.0
}

/// Run configuration. Keys follow the usual parameter names: kinetics
/// `a, b, eps, D_v`; geometry `A` (paraboloid `z = shape_sign·A·r²`),
/// `B` (fiber angle `alpha0 + B (x + y)`), `L, dx, D_L, D_T, D0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub a: f64,
    pub b: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(rename = "A", default)]
    pub paraboloid: f64,
    #[serde(default = "minus_one")]
    pub shape_sign: f64,
    #[serde(rename = "B", default)]
    pub fiber_rate: f64,
    #[serde(default)]
    pub alpha0: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub dx: f64,
    #[serde(rename = "D_v")]
    pub d_v: f64,
    #[serde(rename = "D_L", default = "one")]
    pub d_l: f64,
    #[serde(rename = "D_T", default = "one")]
    pub d_t: f64,
    #[serde(rename = "D0", default = "one")]
    pub d0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub seed_position: [f64; 2],
    /// `+1` counterclockwise, `−1` clockwise.
    #[serde(default = "ccw")]
    pub chirality: i8,
    #[serde(default = "one")]
    pub tip_stride: f64,
    #[serde(default)]
    pub snapshot_stride: Option<f64>,
    /// Defaults to the stability bound; larger values are rejected.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: SeedSettings,
    /// Runs stop when the tip comes this many core radii from the edge.
    #[serde(default = "two")]
    pub boundary_margin: f64,
    /// Replaces the `A`/`B` built-ins with an arbitrary surface.
    #[serde(default)]
    pub surface: Option<SurfaceConfig>,
}

impl ExperimentConfig {
    pub fn kinetics(&self) -> Result<BarkleyKinetics, SolverError> {
        BarkleyKinetics::new(self.a, self.b, self.eps, self.d_v)
    }

    pub fn surface_config(&self) -> SurfaceConfig {
        if let Some(s) = &self.surface {
            return s.clone();
        }
        let shape = if self.paraboloid == 0.0 {
            ShapeConfig::Plane
        } else {
            ShapeConfig::Paraboloid {
                coefficient: self.paraboloid,
                sign: self.shape_sign,
            }
        };
        let fiber = if self.fiber_rate == 0.0 {
            FiberConfig::Constant {
                alpha0: self.alpha0,
            }
        } else {
            FiberConfig::Linear {
                alpha0: self.alpha0,
                rate: self.fiber_rate,
            }
        };
        SurfaceConfig {
            shape,
            fiber,
            d_l: self.d_l / self.d0,
            d_t: self.d_t / self.d0,
            d0: self.d0,
            length: self.length,
            dx: self.dx,
        }
    }

    pub fn surface(&self, base_dir: &Path) -> Result<SurfaceSpec, SolverError> {
        Ok(SurfaceSpec::from_config(self.surface_config(), base_dir)?)
    }

    pub fn time_step(&self) -> Result<f64, SolverError> {
        let s = self.surface_config();
        let bound = max_time_step(s.dx, s.d0, s.d_l, s.d_t);
        match self.dt {
            None => Ok(bound),
            Some(dt) if dt > 0.0 && dt <= bound => Ok(dt),
            Some(dt) => Err(SolverError::InvalidConfig(format!(
                "time step {dt} exceeds the stability bound {bound}"
            ))),
        }
    }

    pub fn metric(&self, base_dir: &Path) -> Result<MetricField, SolverError> {
        let spec = self.surface(base_dir)?;
        let mode = if spec.is_analytic() {
            DerivativeMode::Analytic
        } else {
            DerivativeMode::FiniteDifference
        };
        Ok(christoffel_and_ricci(&spec, mode)?)
    }
}

/// Properties of the planar spiral used for seeding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub omega0: f64,
    pub period: f64,
    pub core_radius: f64,
    pub planar_rotations: usize,
    pub placed_center: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub trajectory: TipTrajectory,
    pub snapshots: Vec<SpiralState>,
    pub final_state: SpiralState,
    pub seed: SeedSummary,
    pub dt: f64,
    pub steps: u64,
    pub wall_seconds: f64,
}

/// Seeds a spiral and evolves it to `t_end`.
pub fn run_experiment(
    config: &ExperimentConfig,
    metric: &MetricField,
) -> Result<ExperimentRun, SolverError> {
    let kinetics = config.kinetics()?;
    let dt = config.time_step()?;
    let position = (config.seed_position[0], config.seed_position[1]);
    let seeded = seed_spiral(
        metric,
        kinetics,
        dt,
        position,
        config.chirality,
        &config.seed,
    )?;
    let seed = SeedSummary {
        omega0: seeded.planar.omega0,
        period: seeded.planar.period,
        core_radius: seeded.planar.core_radius,
        planar_rotations: seeded.planar.rotations,
        placed_center: [seeded.placed_center.0, seeded.placed_center.1],
    };
    continue_run(config, metric, seeded.state, seed)
}

/// Evolves `state` from its own time to `config.t_end`.
pub fn continue_run(
    config: &ExperimentConfig,
    metric: &MetricField,
    state: SpiralState,
    seed: SeedSummary,
) -> Result<ExperimentRun, SolverError> {
    let start = Instant::now();
    let kinetics = config.kinetics()?;
    let dt = config.time_step()?;
    let grid = metric.grid;
    let stencil = build_stencil(metric);
    let mut sim = Simulation::new(&stencil, kinetics, metric.spec.d0, dt, &state)?;
    let level = kinetics.tip_v_level();
    let total = ((config.t_end - state.t) / dt).round().max(0.0) as u64;
    let tip_every = ((config.tip_stride / dt).round() as u64).max(1);
    let snap_every = config
        .snapshot_stride
        .map(|s| ((s / dt).round() as u64).max(1));
    let max_jump = 2.0 * seed.core_radius + 2.0 * grid.dx;
    let margin = config.boundary_margin * seed.core_radius;

    let hint = (seed.placed_center[0], seed.placed_center[1]);
    let mut trajectory = TipTrajectory::new();
    let mut snapshots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut done = 0u64;
    let observe = |sim: &Simulation,
                   trajectory: &mut TipTrajectory,
                   prev: &mut Option<(f64, f64)>|
     -> Result<bool, SolverError> {
        let s = sim.state();
        let tip = match *prev {
            Some(p) => track_tip_near(&grid, &s.u, &s.v, level, p, 2.0 * max_jump)?,
            None => track_tip(&grid, &s.u, &s.v, level, Some(hint))?,
        };
        let Some(tip) = tip else {
            trajectory.status = TrackingStatus::TrackingLost;
            return Ok(false);
        };
        if let Some(p) = *prev {
            if (tip.x - p.0).hypot(tip.y - p.1) > max_jump {
                trajectory.status = TrackingStatus::TrackingLost;
                return Ok(false);
            }
        }
        *prev = Some((tip.x, tip.y));
        trajectory.push(s.t, tip);
        if grid.edge_distance(tip.x, tip.y) < margin {
            trajectory.status = TrackingStatus::NearBoundary;
            return Ok(false);
        }
        Ok(true)
    };

    if snap_every.is_some() {
        snapshots.push(sim.state());
    }
    let mut alive = total == 0 || observe(&sim, &mut trajectory, &mut prev)?;
    while alive && done < total {
        let mut chunk = tip_every - done % tip_every;
        chunk = chunk.min(total - done);
        if let Some(se) = snap_every {
            chunk = chunk.min(se - done % se);
        }
        sim.advance(chunk)?;
        done += chunk;
        if let Some(se) = snap_every {
            if done.is_multiple_of(se) {
                snapshots.push(sim.state());
            }
        }
        if done.is_multiple_of(tip_every) || done == total {
            alive = observe(&sim, &mut trajectory, &mut prev)?;
        }
    }
    Ok(ExperimentRun {
        trajectory,
        snapshots,
        final_state: sim.state(),
        seed,
        dt,
        steps: sim.steps(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
