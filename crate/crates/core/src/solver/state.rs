//! Spiral state and the explicit Euler time stepper.

use rayon::prelude::*;

use super::kinetics::BarkleyKinetics;
use super::stencil::{slot, StencilTable};
use super::SolverError;
use crate::grid::{FieldDump, Grid};

/// State fields on the lattice plus simulation time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpiralState {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl SpiralState {
    pub fn uniform(grid: Grid, u: f64, v: f64) -> Self {
        Self {
            grid,
            u: vec![u; grid.len()],
            v: vec![v; grid.len()],
            t: 0.0,
        }
    }

    pub fn to_dump(&self) -> FieldDump {
        FieldDump::new(self.grid)
            .with_field("u", self.u.clone())
            .with_field("v", self.v.clone())
            .with_meta(serde_json::json!({ "t": self.t }))
    }

    pub fn from_dump(dump: &FieldDump) -> Result<Self, SolverError> {
        let t = dump
            .meta
            .as_ref()
            .and_then(|m| m.get("t"))
            .and_then(|t| t.as_f64())
            .ok_or_else(|| SolverError::InvalidConfig("snapshot lacks meta.t".into()))?;
        Ok(Self {
            grid: dump.grid,
            u: dump.field("u")?.to_vec(),
            v: dump.field("v")?.to_vec(),
            t,
        })
    }
}

/// Largest admissible explicit step `0.9 dx² / (4 max(D_L, D_T))`.
pub fn max_time_step(dx: f64, d0: f64, d_l: f64, d_t: f64) -> f64 {
    0.9 * dx * dx / (4.0 * d0 * d_l.max(d_t))
}

/// Neighbor offsets in the fixed summation order (row-major, centre
/// omitted).
const NEIGHBORS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Time stepper with coefficient tables prescaled by `dt D0 D_u / (dx² √g)`
/// on a padded lattice whose one-node halo is never read with a non-zero
/// weight.
///
/// The update is `u ← u + Σ_nb K_nb (u_nb − u) + dt f(u, v)`, which equals
/// `u + dt (D_u Lap(u) + f)` because every stencil row sums to zero.
pub struct Simulation {
    grid: Grid,
    width: usize,
    weights: [Vec<f64>; 8],
    kinetics: BarkleyKinetics,
    dt: f64,
    v_ratio: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    u_next: Vec<f64>,
    v_next: Vec<f64>,
    t0: f64,
    steps: u64,
}

impl Simulation {
    pub fn new(
        stencil: &StencilTable,
        kinetics: BarkleyKinetics,
        d0: f64,
        dt: f64,
        state: &SpiralState,
    ) -> Result<Self, SolverError> {
        kinetics.validate()?;
        let g = stencil.grid;
        if state.grid != g {
            return Err(SolverError::GridMismatch);
        }
        if !(dt > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "time step {dt} must be positive"
            )));
        }
        let width = g.nx + 2;
        let padded = width * (g.ny + 2);
        let inv_dx2 = 1.0 / (g.dx * g.dx);
        let scale_u = dt * d0 * kinetics.d_u * inv_dx2;
        let mut weights: [Vec<f64>; 8] = std::array::from_fn(|_| vec![0.0; padded]);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                let p = (j + 1) * width + i + 1;
                let s = scale_u * stencil.inv_sqrt_g[k];
                for (w, &(m, n)) in weights.iter_mut().zip(&NEIGHBORS) {
                    w[p] = stencil.coeffs[slot(m, n)][k] * s;
                }
            }
        }
        let v_ratio = if kinetics.d_u > 0.0 {
            kinetics.d_v / kinetics.d_u
        } else {
            0.0
        };
        if kinetics.d_u == 0.0 && kinetics.d_v > 0.0 {
            return Err(SolverError::InvalidConfig(
                "D_u = 0 with D_v > 0 is unsupported".into(),
            ));
        }
        let mut sim = Self {
            grid: g,
            width,
            weights,
            kinetics,
            dt,
            v_ratio,
            u: vec![0.0; padded],
            v: vec![0.0; padded],
            u_next: vec![0.0; padded],
            v_next: vec![0.0; padded],
            t0: state.t,
            steps: 0,
        };
        sim.load(state)?;
        Ok(sim)
    }

    /// Replaces the fields and restarts the clock at `state.t`.
    pub fn load(&mut self, state: &SpiralState) -> Result<(), SolverError> {
        let g = self.grid;
        if state.grid != g {
            return Err(SolverError::GridMismatch);
        }
        for j in 0..g.ny {
            let p = (j + 1) * self.width + 1;
            self.u[p..p + g.nx].copy_from_slice(&state.u[j * g.nx..(j + 1) * g.nx]);
            self.v[p..p + g.nx].copy_from_slice(&state.v[j * g.nx..(j + 1) * g.nx]);
        }
        self.t0 = state.t;
        self.steps = 0;
        self.check_finite()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `t₀ + n dt` after `n` steps, free of accumulated rounding.
    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn state(&self) -> SpiralState {
        let g = self.grid;
        let mut u = Vec::with_capacity(g.len());
        let mut v = Vec::with_capacity(g.len());
        for j in 0..g.ny {
            let p = (j + 1) * self.width + 1;
            u.extend_from_slice(&self.u[p..p + g.nx]);
            v.extend_from_slice(&self.v[p..p + g.nx]);
        }
        SpiralState {
            grid: g,
            u,
            v,
            t: self.time(),
        }
    }

    /// `u` at node `(i, j)` without copying the state.
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[(j + 1) * self.width + i + 1]
    }

    fn check_finite(&self) -> Result<(), SolverError> {
        let g = self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let p = (j + 1) * self.width + i + 1;
                if !self.u[p].is_finite() || !self.v[p].is_finite() {
                    return Err(SolverError::NonFinite {
                        i,
                        j,
                        t: self.time(),
                    });
                }
            }
        }
        Ok(())
    }

    fn params(&self) -> RowParams {
        RowParams {
            dt: self.dt,
            b: self.kinetics.b,
            inv_a: 1.0 / self.kinetics.a,
            inv_eps: 1.0 / self.kinetics.eps,
            v_ratio: self.v_ratio,
        }
    }

    /// One explicit Euler step. Rows are updated in parallel from the
    /// previous buffers, so the result does not depend on the worker count.
    pub fn step(&mut self) -> Result<(), SolverError> {
        let g = self.grid;
        let w = self.width;
        let params = self.params();
        let src = Fields {
            u: &self.u,
            v: &self.v,
        };
        let weights = &self.weights;
        let interior_u = &mut self.u_next[w..w * (g.ny + 1)];
        let interior_v = &mut self.v_next[w..w * (g.ny + 1)];
        let bad = interior_u
            .par_chunks_mut(w)
            .zip(interior_v.par_chunks_mut(w))
            .enumerate()
            .with_min_len(8)
            .map(|(r, (out_u, out_v))| {
                row_update(
                    weights,
                    &src,
                    w,
                    g.nx,
                    r,
                    &mut out_u[1..=g.nx],
                    &mut out_v[1..=g.nx],
                    &params,
                )
                .then_some(r)
            })
            .find_first(|r| r.is_some())
            .flatten();
        std::mem::swap(&mut self.u, &mut self.u_next);
        std::mem::swap(&mut self.v, &mut self.v_next);
        self.steps += 1;
        match bad {
            Some(_) => Err(self.locate_non_finite()),
            None => Ok(()),
        }
    }

    fn locate_non_finite(&self) -> SolverError {
        match self.check_finite() {
            Err(e) => e,
            Ok(()) => SolverError::NonFinite {
                i: 0,
                j: 0,
                t: self.time(),
            },
        }
    }

    /// Advances `n` steps. With a single worker, blocks of steps are fused
    /// into one sweep over the rows (a skewed wavefront over two buffers),
    /// so each coefficient row is reused from cache across the block. The
    /// per-node arithmetic is identical to [`Simulation::step`].
    pub fn advance(&mut self, n: u64) -> Result<(), SolverError> {
        if rayon::current_num_threads() > 1 {
            for _ in 0..n {
                self.step()?;
            }
            return Ok(());
        }
        let block = self.block_len() as u64;
        let mut left = n;
        while left > 0 {
            let t = left.min(block) as usize;
            self.advance_fused(t)?;
            left -= t as u64;
        }
        Ok(())
    }

    fn block_len(&self) -> usize {
        const CACHE_BYTES: usize = 3 << 19;
        let row_bytes = self.width * 8 * 12;
        (CACHE_BYTES / row_bytes).saturating_sub(3).clamp(1, 32)
    }

    fn advance_fused(&mut self, levels: usize) -> Result<(), SolverError> {
        let g = self.grid;
        let w = self.width;
        let params = self.params();
        let mut bad = false;
        for front in 0..g.ny + levels - 1 {
            for s in 1..=levels {
                let Some(r) = (front + 1).checked_sub(s) else {
                    break;
                };
                if r >= g.ny {
                    continue;
                }
                let lo = (r + 1) * w + 1;
                let (src_u, dst_u, src_v, dst_v) = if s % 2 == 1 {
                    (&self.u, &mut self.u_next, &self.v, &mut self.v_next)
                } else {
                    (&self.u_next, &mut self.u, &self.v_next, &mut self.v)
                };
                let src = Fields { u: src_u, v: src_v };
                bad |= row_update(
                    &self.weights,
                    &src,
                    w,
                    g.nx,
                    r,
                    &mut dst_u[lo..lo + g.nx],
                    &mut dst_v[lo..lo + g.nx],
                    &params,
                );
            }
        }
        if levels % 2 == 1 {
            std::mem::swap(&mut self.u, &mut self.u_next);
            std::mem::swap(&mut self.v, &mut self.v_next);
        }
        self.steps += levels as u64;
        if bad {
            return Err(self.locate_non_finite());
        }
        Ok(())
    }
}

struct Fields<'a> {
    u: &'a [f64],
    v: &'a [f64],
}

/// Updates interior row `r` from `src` into `out_u`, `out_v`.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn row_update(
    weights: &[Vec<f64>; 8],
    src: &Fields,
    w: usize,
    nx: usize,
    r: usize,
    out_u: &mut [f64],
    out_v: &mut [f64],
    params: &RowParams,
) -> bool {
    let lo = (r + 1) * w + 1;
    let hi = lo + nx;
    let k: [&[f64]; 8] = std::array::from_fn(|s| &weights[s][lo..hi]);
    let (u, v) = (src.u, src.v);
    let rows = RowInput {
        um: &u[lo - w - 1..hi - w + 1],
        uc: &u[lo - 1..hi + 1],
        up: &u[lo + w - 1..hi + w + 1],
        vm: &v[lo - w - 1..hi - w + 1],
        vc: &v[lo - 1..hi + 1],
        vp: &v[lo + w - 1..hi + w + 1],
    };
    update_row(&k, &rows, out_u, out_v, params)
}

struct RowParams {
    dt: f64,
    b: f64,
    inv_a: f64,
    inv_eps: f64,
    v_ratio: f64,
}

struct RowInput<'a> {
    um: &'a [f64],
    uc: &'a [f64],
    up: &'a [f64],
    vm: &'a [f64],
    vc: &'a [f64],
    vp: &'a [f64],
}

/// Returns `true` iff any written value is non-finite.
fn update_row(
    k: &[&[f64]; 8],
    r: &RowInput,
    out_u: &mut [f64],
    out_v: &mut [f64],
    p: &RowParams,
) -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { update_row_avx512(k, r, out_u, out_v, p) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { update_row_avx2(k, r, out_u, out_v, p) };
        }
    }
    dispatch(k, r, out_u, out_v, p)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn update_row_avx512(
    k: &[&[f64]; 8],
    r: &RowInput,
    out_u: &mut [f64],
    out_v: &mut [f64],
    p: &RowParams,
) -> bool {
    dispatch(k, r, out_u, out_v, p)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn update_row_avx2(
    k: &[&[f64]; 8],
    r: &RowInput,
    out_u: &mut [f64],
    out_v: &mut [f64],
    p: &RowParams,
) -> bool {
    dispatch(k, r, out_u, out_v, p)
}

#[inline(always)]
fn dispatch(
    k: &[&[f64]; 8],
    r: &RowInput,
    out_u: &mut [f64],
    out_v: &mut [f64],
    p: &RowParams,
) -> bool {
    if p.v_ratio != 0.0 {
        update_row_body::<true>(k, r, out_u, out_v, p)
    } else {
        update_row_body::<false>(k, r, out_u, out_v, p)
    }
}

#[inline(always)]
fn weighted_differences(k: &[&[f64]; 8], m: &[f64], c: &[f64], p: &[f64], i: usize) -> f64 {
    let x = c[i + 1];
    let mut acc = k[0][i] * (m[i] - x);
    acc += k[1][i] * (m[i + 1] - x);
    acc += k[2][i] * (m[i + 2] - x);
    acc += k[3][i] * (c[i] - x);
    acc += k[4][i] * (c[i + 2] - x);
    acc += k[5][i] * (p[i] - x);
    acc += k[6][i] * (p[i + 1] - x);
    acc += k[7][i] * (p[i + 2] - x);
    acc
}

/// Elementwise IEEE arithmetic only, so vector width never changes results.
#[inline(always)]
fn update_row_body<const DIFFUSE_V: bool>(
    k: &[&[f64]; 8],
    r: &RowInput,
    out_u: &mut [f64],
    out_v: &mut [f64],
    p: &RowParams,
) -> bool {
    let n = out_u.len();
    let k: [&[f64]; 8] = std::array::from_fn(|s| &k[s][..n]);
    let (um, uc, up) = (&r.um[..n + 2], &r.uc[..n + 2], &r.up[..n + 2]);
    let (vm, vc, vp) = (&r.vm[..n + 2], &r.vc[..n + 2], &r.vp[..n + 2]);
    let out_v = &mut out_v[..n];
    let mut bad = false;
    for i in 0..n {
        let c = uc[i + 1];
        let acc = weighted_differences(&k, um, uc, up, i);
        let vv = vc[i + 1];
        let f = c * (1.0 - c) * (c - (vv + p.b) * p.inv_a) * p.inv_eps;
        let un = c + acc + p.dt * f;
        let mut vn = vv + p.dt * (c - vv);
        if DIFFUSE_V {
            vn += p.v_ratio * weighted_differences(&k, vm, vc, vp, i);
        }
        out_u[i] = un;
        out_v[i] = vn;
        // x − x is nonzero (NaN) exactly when x is NaN or infinite; branch free.
        #[allow(clippy::eq_op)]
        let nonfinite = (un - un != 0.0) | (vn - vn != 0.0);
        bad |= nonfinite;
    }
    bad
}
