//! Spiral tip location at the crossing of `u = 1/2` with `v = a/2 − b`.

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::grid::Grid;

/// One located tip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TipPoint {
    pub x: f64,
    pub y: f64,
    /// Direction of `∇u` at the tip, in `(−π, π]`.
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TipSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Unwrapped phase.
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingStatus {
    Complete,
    /// Tip vanished or jumped by more than one core diameter.
    TrackingLost,
    /// Tip came within two core radii of the boundary.
    NearBoundary,
}

/// Tip samples of one run with per-rotation period estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TipTrajectory {
    pub samples: Vec<TipSample>,
    /// `+1` for counterclockwise, `−1` for clockwise rotation, `0` if unknown.
    pub chirality: i8,
    pub status: TrackingStatus,
}

impl TipTrajectory {
    pub fn new() -> Self {
        Self {
            samples: Vec::new(),
            chirality: 0,
            status: TrackingStatus::Complete,
        }
    }

    /// Appends a tip, unwrapping its phase against the previous sample.
    /// Timestamps must increase strictly.
    pub fn push(&mut self, t: f64, tip: TipPoint) {
        let phase = match self.samples.last() {
            Some(prev) => {
                assert!(t > prev.t, "tip samples must be strictly time ordered");
                let mut d = tip.phase - prev.phase.rem_euclid(std::f64::consts::TAU);
                d = (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
                    - std::f64::consts::PI;
                prev.phase + d
            }
            None => tip.phase,
        };
        self.samples.push(TipSample {
            t,
            x: tip.x,
            y: tip.y,
            phase,
        });
        self.update_chirality();
    }

    fn update_chirality(&mut self) {
        if let (Some(first), Some(last)) = (self.samples.first(), self.samples.last()) {
            let turn = last.phase - first.phase;
            self.chirality = if turn > std::f64::consts::PI {
                1
            } else if turn < -std::f64::consts::PI {
                -1
            } else {
                0
            };
        }
    }

    /// Times at which the unwrapped phase completes successive full turns.
    pub fn turn_times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let Some(first) = self.samples.first() else {
            return out;
        };
        let dir = if self.chirality < 0 { -1.0 } else { 1.0 };
        let mut next = 1.0;
        for w in self.samples.windows(2) {
            let (p0, p1) = (
                dir * (w[0].phase - first.phase),
                dir * (w[1].phase - first.phase),
            );
            while p1 >= next * std::f64::consts::TAU {
                let target = next * std::f64::consts::TAU;
                if p0 < target {
                    let s = (target - p0) / (p1 - p0);
                    out.push(w[0].t + s * (w[1].t - w[0].t));
                }
                next += 1.0;
            }
        }
        out
    }

    /// Durations of completed rotations.
    pub fn period_estimates(&self) -> Vec<f64> {
        let mut times = vec![self.samples.first().map(|s| s.t).unwrap_or(0.0)];
        times.extend(self.turn_times());
        times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Period estimate attached to each sample: the duration of the rotation
    /// containing it, or `NaN` outside completed rotations.
    pub fn sample_periods(&self) -> Vec<f64> {
        let mut turns = vec![self.samples.first().map(|s| s.t).unwrap_or(0.0)];
        turns.extend(self.turn_times());
        self.samples
            .iter()
            .map(|s| {
                turns
                    .windows(2)
                    .find(|w| s.t >= w[0] && s.t < w[1])
                    .map(|w| w[1] - w[0])
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "t,x,y,phase,period_estimate")?;
        for (s, p) in self.samples.iter().zip(self.sample_periods()) {
            writeln!(w, "{},{},{},{},{}", s.t, s.x, s.y, s.phase, p)?;
        }
        Ok(())
    }
}

/// Time average of the piecewise-linear tip path over `[t0, t1]`, which must
/// lie within the sampled interval.
pub fn time_average(s: &[TipSample], t0: f64, t1: f64) -> (f64, f64) {
    assert!(
        s.len() >= 2 && t1 > t0,
        "need two samples and a non-empty window"
    );
    let at = |k: usize, t: f64| {
        let (a, b) = (s[k], s[k + 1]);
        let f = (t - a.t) / (b.t - a.t);
        (a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))
    };
    let mut k = s
        .partition_point(|p| p.t <= t0)
        .saturating_sub(1)
        .min(s.len() - 2);
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut ta = t0;
    let mut pa = at(k, t0);
    while ta < t1 {
        let tb = if k + 2 >= s.len() {
            t1
        } else {
            s[k + 1].t.min(t1)
        };
        let pb = at(k, tb);
        sx += 0.5 * (pa.0 + pb.0) * (tb - ta);
        sy += 0.5 * (pa.1 + pb.1) * (tb - ta);
        ta = tb;
        pa = pb;
        if k + 2 < s.len() {
            k += 1;
        }
    }
    let d = t1 - t0;
    (sx / d, sy / d)
}

impl Default for TipTrajectory {
    fn default() -> Self {
        Self::new()
    }
}

/// Crossings of the two bilinear level sets inside the unit cell, given
/// corner offsets `a = u − 1/2`, `b = v − v*` ordered `(0,0), (1,0), (0,1), (1,1)`.
fn cell_crossings(a: [f64; 4], b: [f64; 4]) -> Vec<(f64, f64)> {
    let coef = |c: [f64; 4]| [c[0], c[1] - c[0], c[2] - c[0], c[3] - c[1] - c[2] + c[0]];
    let [a0, a1, a2, a3] = coef(a);
    let [b0, b1, b2, b3] = coef(b);
    // Eliminating s from a(s,t) = b(s,t) = 0 leaves q2 t² + q1 t + q0 = 0.
    let q2 = b2 * a3 - b3 * a2;
    let q1 = b0 * a3 + b2 * a1 - b1 * a2 - b3 * a0;
    let q0 = b0 * a1 - b1 * a0;
    let scale = q2.abs().max(q1.abs()).max(q0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = Vec::with_capacity(2);
    if q2.abs() <= 1e-12 * scale {
        if q1 != 0.0 {
            roots.push(-q0 / q1);
        }
    } else {
        let disc = q1 * q1 - 4.0 * q2 * q0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (q1 + q1.signum() * sq);
            if q != 0.0 {
                roots.push(q0 / q);
            }
            roots.push(q / q2);
        }
    }
    const TOL: f64 = 1e-9;
    roots
        .into_iter()
        .filter(|t| (-TOL..=1.0 + TOL).contains(t))
        .filter_map(|t| {
            let (da, db) = (a1 + a3 * t, b1 + b3 * t);
            let s = if da.abs() >= db.abs() {
                -(a0 + a2 * t) / da
            } else {
                -(b0 + b2 * t) / db
            };
            (s.is_finite() && (-TOL..=1.0 + TOL).contains(&s))
                .then_some((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)))
        })
        .collect()
}

/// All tip candidates on the grid, with duplicates from shared cell edges
/// merged.
pub fn tip_candidates(grid: &Grid, u: &[f64], v: &[f64], v_level: f64) -> Vec<TipPoint> {
    candidates_in(grid, u, v, v_level, (0, grid.nx - 1), (0, grid.ny - 1))
}

/// Candidates in the cells `[i0, i1) × [j0, j1)`.
fn candidates_in(
    grid: &Grid,
    u: &[f64],
    v: &[f64],
    v_level: f64,
    (i0, i1): (usize, usize),
    (j0, j1): (usize, usize),
) -> Vec<TipPoint> {
    let mut out: Vec<TipPoint> = Vec::new();
    for j in j0..j1 {
        for i in i0..i1 {
            let ids = [
                grid.index(i, j),
                grid.index(i + 1, j),
                grid.index(i, j + 1),
                grid.index(i + 1, j + 1),
            ];
            let a = ids.map(|k| u[k] - 0.5);
            let b = ids.map(|k| v[k] - v_level);
            let straddles = |c: [f64; 4]| {
                let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if !straddles(a) || !straddles(b) {
                continue;
            }
            for (s, t) in cell_crossings(a, b) {
                let x = grid.x(i) + s * grid.dx;
                let y = grid.y(j) + t * grid.dx;
                if out
                    .iter()
                    .any(|p| (p.x - x).hypot(p.y - y) < 1e-6 * grid.dx)
                {
                    continue;
                }
                let gx = ((a[1] - a[0]) * (1.0 - t) + (a[3] - a[2]) * t) / grid.dx;
                let gy = ((a[2] - a[0]) * (1.0 - s) + (a[3] - a[1]) * s) / grid.dx;
                out.push(TipPoint {
                    x,
                    y,
                    phase: gy.atan2(gx),
                });
            }
        }
    }
    out
}

/// Locates the tip. With several candidates the one nearest to `previous`
/// is returned; without a previous tip that is an error.
pub fn track_tip(
    grid: &Grid,
    u: &[f64],
    v: &[f64],
    v_level: f64,
    previous: Option<(f64, f64)>,
) -> Result<Option<TipPoint>, SolverError> {
    let c = tip_candidates(grid, u, v, v_level);
    match (c.len(), previous) {
        (0, _) => Ok(None),
        (1, _) => Ok(Some(c[0])),
        (n, None) => Err(SolverError::AmbiguousTip(n)),
        (_, Some((px, py))) => Ok(c.into_iter().min_by(|p, q| {
            let dp = (p.x - px).hypot(p.y - py);
            let dq = (q.x - px).hypot(q.y - py);
            dp.total_cmp(&dq)
        })),
    }
}

/// [`track_tip`] restricted to cells within `radius` of `previous`, with
/// a full-grid search when the window holds no candidate.
pub fn track_tip_near(
    grid: &Grid,
    u: &[f64],
    v: &[f64],
    v_level: f64,
    previous: (f64, f64),
    radius: f64,
) -> Result<Option<TipPoint>, SolverError> {
    let (fi, fj) = grid.locate(previous.0, previous.1);
    let r = radius / grid.dx;
    let span = |c: f64, n: usize| {
        let lo = (c - r).floor().max(0.0) as usize;
        let hi = ((c + r).ceil().max(0.0) as usize).min(n - 1);
        (lo.min(hi), hi)
    };
    let c = candidates_in(grid, u, v, v_level, span(fi, grid.nx), span(fj, grid.ny));
    if c.is_empty() {
        return track_tip(grid, u, v, v_level, Some(previous));
    }
    Ok(c.into_iter().min_by(|p, q| {
        let dp = (p.x - previous.0).hypot(p.y - previous.1);
        let dq = (q.x - previous.0).hypot(q.y - previous.1);
        dp.total_cmp(&dq)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_spiral_no_tip() {
        let g = Grid::centered_square(4.0, 0.5);
        let z = vec![0.0; g.len()];
        assert_eq!(track_tip(&g, &z, &z, 0.46, None).unwrap(), None);
    }

    #[test]
    fn exact_for_linear_fields() {
        let g = Grid::centered_square(6.0, 0.25);
        let (xs, ys, c1, c2, lvl) = (0.3712, -1.1093, 0.7, -1.3, 0.46);
        let u = g.sample(|x, _| 0.5 + (x - xs) * c1);
        let v = g.sample(|_, y| lvl + (y - ys) * c2);
        let tip = track_tip(&g, &u, &v, lvl, None).unwrap().unwrap();
        assert!((tip.x - xs).abs() < 1e-10 && (tip.y - ys).abs() < 1e-10);
        assert!(tip.phase.abs() < 1e-12);
    }

    #[test]
    fn nearest_candidate_wins_with_previous_tip() {
        let g = Grid::centered_square(8.0, 0.25);
        // u = 1/2 on the lines y = ±2, v = v* on x = 1.
        let u = g.sample(|_, y| 0.5 + 0.1 * (y * y - 4.0));
        let v = g.sample(|x, _| 0.2 + 0.3 * (x - 1.0));
        assert!(matches!(
            track_tip(&g, &u, &v, 0.2, None),
            Err(SolverError::AmbiguousTip(2))
        ));
        let tip = track_tip(&g, &u, &v, 0.2, Some((0.0, -1.5)))
            .unwrap()
            .unwrap();
        assert!((tip.x - 1.0).abs() < 1e-12 && (tip.y + 2.0).abs() < 1e-12);
    }

    #[test]
    fn period_estimates_from_unwrapped_phase() {
        let mut tr = TipTrajectory::new();
        let omega = 2.0 * std::f64::consts::PI / 3.7;
        for n in 0..200 {
            let t = n as f64 * 0.1;
            let ph = (omega * t + 0.3).sin().atan2((omega * t + 0.3).cos());
            tr.push(
                t,
                TipPoint {
                    x: 0.0,
                    y: 0.0,
                    phase: ph,
                },
            );
        }
        assert_eq!(tr.chirality, 1);
        let p = tr.period_estimates();
        assert!(p.len() >= 4);
        for q in p {
            assert!((q - 3.7).abs() < 1e-9);
        }
    }
}
