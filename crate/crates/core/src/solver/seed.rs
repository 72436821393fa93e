//! Planar pre-run that produces a rigidly rotating spiral and places it on
//! the target surface.

use serde::{Deserialize, Serialize};

use super::kinetics::BarkleyKinetics;
use super::state::{Simulation, SpiralState};
use super::stencil::build_stencil;
use super::tip::{time_average, track_tip, TipTrajectory};
use super::SolverError;
use crate::geometry::{
    christoffel_and_ricci, DerivativeMode, FiberConfig, MetricField, ShapeConfig, SurfaceConfig,
    SurfaceSpec,
};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedSettings {
    /// Give up after this many rotations without orbit closure.
    pub max_rotations: usize,
    /// Orbit closure: mean centre displacement per rotation between two
    /// consecutive blocks of `closure_window` rotations.
    pub closure_tol: f64,
    pub closure_window: usize,
    /// Rotations discarded before closure is tested.
    pub transient_rotations: usize,
    /// Tip sampling interval of the pre-run.
    pub sample_dt: f64,
    /// Orbit centres farther than this from the origin are moved back to it.
    pub recenter_distance: f64,
}

impl Default for SeedSettings {
    fn default() -> Self {
        Self {
            max_rotations: 80,
            closure_tol: 1e-2,
            closure_window: 3,
            transient_rotations: 3,
            sample_dt: 0.05,
            recenter_distance: 1.0,
        }
    }
}

/// Converged planar spiral.
#[derive(Clone, Debug)]
pub struct PlanarSeed {
    pub state: SpiralState,
    /// Orbit centre of the final rotation.
    pub center: (f64, f64),
    pub period: f64,
    pub omega0: f64,
    /// Largest tip distance from the centre over the final rotation.
    pub core_radius: f64,
    pub rotations: usize,
    pub chirality: i8,
    /// Tip samples of the whole pre-run.
    pub trajectory: TipTrajectory,
}

/// Uniform cross-field stimulus: `u = 1` for `x > 0`; `v = a/2` on the
/// half-plane `y > 0` for clockwise and `y < 0` for counterclockwise
/// rotation.
pub fn cross_field(grid: Grid, kinetics: &BarkleyKinetics, chirality: i8) -> SpiralState {
    let mut s = SpiralState::uniform(grid, 0.0, 0.0);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.index(i, j);
            let (x, y) = (grid.x(i), grid.y(j));
            if x > 0.0 {
                s.u[k] = 1.0;
            }
            let refractory = if chirality >= 0 { y < 0.0 } else { y > 0.0 };
            if refractory {
                s.v[k] = kinetics.a / 2.0;
            }
        }
    }
    s
}

/// Planar metric equal to the target metric at the origin.
pub fn planar_metric(target: &SurfaceSpec, length: f64) -> Result<MetricField, SolverError> {
    let (fx, fy) = target.slopes_at(0.0, 0.0)?;
    if fx != 0.0 || fy != 0.0 {
        return Err(SolverError::InvalidConfig(
            "planar seeding needs a surface that is flat at the origin".into(),
        ));
    }
    let alpha0 = target.angle_at(0.0, 0.0)?;
    let spec = SurfaceSpec::analytic(SurfaceConfig {
        shape: ShapeConfig::Plane,
        fiber: FiberConfig::Constant { alpha0 },
        d_l: target.d_l,
        d_t: target.d_t,
        d0: target.d0,
        length,
        dx: target.dx,
    })?;
    Ok(christoffel_and_ricci(&spec, DerivativeMode::Analytic)?)
}

/// Time-averaged tip position and largest tip distance from it over
/// `[t0, t1]`.
fn orbit(tr: &TipTrajectory, t0: f64, t1: f64) -> ((f64, f64), f64) {
    let (cx, cy) = time_average(&tr.samples, t0, t1);
    let r = tr
        .samples
        .iter()
        .filter(|s| s.t >= t0 && s.t <= t1)
        .map(|s| (s.x - cx).hypot(s.y - cy))
        .fold(0.0, f64::max);
    ((cx, cy), r)
}

/// Copies `state` onto `target` translated by the whole number of nodes
/// nearest to `to − from`. Nodes with no source take the nearest edge value.
pub fn shift_state(
    state: &SpiralState,
    from: (f64, f64),
    target: Grid,
    to: (f64, f64),
) -> SpiralState {
    let src = state.grid;
    assert!(
        (src.dx - target.dx).abs() < 1e-12 * target.dx,
        "grid spacings must match"
    );
    let shift = |p: f64, c: f64| ((c - p) / target.dx).round() as i64;
    let (si, sj) = (shift(to.0, from.0), shift(to.1, from.1));
    let mut out = SpiralState::uniform(target, 0.0, 0.0);
    out.t = state.t;
    for j in 0..target.ny {
        for i in 0..target.nx {
            let pi = ((target.x(i) - src.x0) / src.dx).round() as i64 + si;
            let pj = ((target.y(j) - src.y0) / src.dx).round() as i64 + sj;
            let pi = pi.clamp(0, src.nx as i64 - 1) as usize;
            let pj = pj.clamp(0, src.ny as i64 - 1) as usize;
            let k = target.index(i, j);
            out.u[k] = state.u[src.index(pi, pj)];
            out.v[k] = state.v[src.index(pi, pj)];
        }
    }
    out
}

/// Evolves the cross-field stimulus on a plane with constant metric until
/// the tip orbit closes. An orbit that settles off-centre is moved back to
/// the origin so that the boundary does not make it drift.
pub fn planar_seed(
    metric: &MetricField,
    kinetics: BarkleyKinetics,
    dt: f64,
    chirality: i8,
    settings: &SeedSettings,
) -> Result<PlanarSeed, SolverError> {
    let grid = metric.grid;
    let stencil = build_stencil(metric);
    let init = cross_field(grid, &kinetics, chirality);
    let mut sim = Simulation::new(&stencil, kinetics, metric.spec.d0, dt, &init)?;
    let stride = ((settings.sample_dt / dt).round() as u64).max(1);
    let level = kinetics.tip_v_level();
    let mut tr = TipTrajectory::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut centers: Vec<(f64, f64)> = Vec::new();
    let mut checked_turns = 0;
    let mut total = 0;
    let mut last_d = f64::NAN;
    let w = settings.closure_window.max(1);
    loop {
        sim.advance(stride)?;
        let state = sim.state();
        let tip = match track_tip(&grid, &state.u, &state.v, level, prev) {
            Err(SolverError::AmbiguousTip(_)) if tr.samples.is_empty() => continue,
            other => other?,
        };
        let Some(tip) = tip else {
            if tr.samples.is_empty() {
                if state.u.iter().all(|&u| u < 0.5) {
                    return Err(SolverError::SeedFailed(
                        "excitation died out before a tip formed".into(),
                    ));
                }
                continue;
            }
            return Err(SolverError::SeedFailed(
                "spiral tip vanished during pre-run".into(),
            ));
        };
        prev = Some((tip.x, tip.y));
        tr.push(state.t, tip);
        let turns = tr.turn_times();
        if turns.len() <= checked_turns {
            continue;
        }
        checked_turns = turns.len();
        total += 1;
        let mut bounds = vec![tr.samples[0].t];
        bounds.extend(&turns);
        let n = bounds.len();
        let (c, r) = orbit(&tr, bounds[n - 2], bounds[n - 1]);
        centers.push(c);
        let k = centers.len();
        if k > settings.transient_rotations && c.0.hypot(c.1) > settings.recenter_distance {
            sim.load(&shift_state(&state, c, grid, (0.0, 0.0)))?;
            tr = TipTrajectory::new();
            prev = None;
            centers.clear();
            checked_turns = 0;
        } else if k >= settings.transient_rotations + 2 * w {
            let mean = |b: &[(f64, f64)]| {
                let n = b.len() as f64;
                (
                    b.iter().map(|c| c.0).sum::<f64>() / n,
                    b.iter().map(|c| c.1).sum::<f64>() / n,
                )
            };
            let (a, b) = (mean(&centers[k - 2 * w..k - w]), mean(&centers[k - w..]));
            let d = (b.0 - a.0).hypot(b.1 - a.1) / w as f64;
            last_d = d;
            if d < settings.closure_tol {
                let period = bounds[n - 1] - bounds[n - 2];
                let chir = tr.chirality;
                if chir != chirality.signum() {
                    return Err(SolverError::SeedFailed(format!(
                        "requested chirality {chirality} but the spiral rotates with {chir}"
                    )));
                }
                return Ok(PlanarSeed {
                    state,
                    center: b,
                    period,
                    omega0: std::f64::consts::TAU / period,
                    core_radius: r,
                    rotations: total,
                    chirality: chir,
                    trajectory: tr,
                });
            }
        }
        if total >= settings.max_rotations {
            return Err(SolverError::SeedFailed(format!(
                "tip orbit did not close within {total} rotations, last centre shift {last_d:.2e}"
            )));
        }
    }
}

/// Copies the planar solution onto `target` so that its orbit centre lands
/// on the node nearest to `position`.
pub fn place_seed(seed: &PlanarSeed, target: Grid, position: (f64, f64)) -> SpiralState {
    let mut s = shift_state(&seed.state, seed.center, target, position);
    s.t = 0.0;
    s
}

/// Seeding outcome on the target surface.
#[derive(Clone, Debug)]
pub struct Seeded {
    pub state: SpiralState,
    pub planar: PlanarSeed,
    /// Where the planar orbit centre was placed.
    pub placed_center: (f64, f64),
}

/// Runs the planar pre-run on a domain enlarged by the seed offset and
/// places the result at `position`.
pub fn seed_spiral(
    target: &MetricField,
    kinetics: BarkleyKinetics,
    dt: f64,
    position: (f64, f64),
    chirality: i8,
    settings: &SeedSettings,
) -> Result<Seeded, SolverError> {
    let g = target.grid;
    if !g.contains(position.0, position.1) {
        return Err(SolverError::InvalidConfig(format!(
            "seed position {position:?} lies outside the domain"
        )));
    }
    let offset = position.0.abs().max(position.1.abs());
    let pad = (offset / g.dx).ceil();
    let length = target.spec.length + 2.0 * pad * g.dx;
    let planar = planar_seed(
        &planar_metric(&target.spec, length)?,
        kinetics,
        dt,
        chirality,
        settings,
    )?;
    let state = place_seed(&planar, g, position);
    let placed = (
        planar.center.0 + ((position.0 - planar.center.0) / g.dx).round() * g.dx,
        planar.center.1 + ((position.1 - planar.center.1) / g.dx).round() * g.dx,
    );
    Ok(Seeded {
        state,
        planar,
        placed_center: placed,
    })
}
