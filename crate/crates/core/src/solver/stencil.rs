//! Nine-point divergence-form stencil for `(1/√g) ∂_A(√g g^AB ∂_B u)`.
//!
//! The operator at node `(i, j)` is the net flux through its four faces.
//! With `h^AB = √g g^AB` sampled at face midpoints, the flux through the
//! face `i + ½` is
//! `h¹¹ (u_{i+1,j} − u_{i,j}) + ¼ h¹² (u_{i+1,j+1} + u_{i,j+1} − u_{i+1,j−1} − u_{i,j−1})`
//! and the `j + ½` faces are analogous. Expanding the fluxes gives the
//! coefficients `C_{m,n}` at every interior node.
//!
//! No-flux boundaries: faces on the outer boundary carry no flux, and the
//! tangential `h¹²` part of a face lying on a boundary row or column
//! vanishes (mirror ghost nodes). Every row still sums to zero and the
//! scheme conserves `Σ √g u`.

use rayon::prelude::*;

use crate::geometry::{induced_metric, MetricField, Sym2};
use crate::grid::Grid;

/// Index of `C_{m,n}` in [`StencilTable::coeffs`]; `n` is the slow index.
pub const fn slot(m: i32, n: i32) -> usize {
    ((n + 1) * 3 + (m + 1)) as usize
}

/// How `h^AB` is obtained at face midpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfNodeRule {
    /// Closed-form metric evaluated at the face midpoint.
    Analytic,
    /// Arithmetic mean of the two adjacent node values.
    Average,
}

#[derive(Clone, Debug)]
pub struct StencilTable {
    pub grid: Grid,
    /// `C_{m,n}` per node, ordered by [`slot`].
    pub coeffs: [Vec<f64>; 9],
    pub inv_sqrt_g: Vec<f64>,
    pub rule: HalfNodeRule,
}

impl StencilTable {
    pub fn coeff(&self, m: i32, n: i32, idx: usize) -> f64 {
        self.coeffs[slot(m, n)][idx]
    }

    /// `Σ_{m,n} C_{m,n}` at a node.
    pub fn row_sum(&self, idx: usize) -> f64 {
        self.coeffs.iter().map(|c| c[idx]).sum()
    }

    /// `(1/(dx² √g)) Σ C_{m,n} w(x + m dx, y + n dx)` with the fixed
    /// row-major summation order. Reference evaluation, not the hot path.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let inv_dx2 = 1.0 / (g.dx * g.dx);
        let mut out = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                let mut acc = 0.0;
                for n in -1..=1i32 {
                    for m in -1..=1i32 {
                        let c = self.coeff(m, n, k);
                        if c != 0.0 {
                            let ii = (i as i64 + m as i64) as usize;
                            let jj = (j as i64 + n as i64) as usize;
                            acc += c * w[g.index(ii, jj)];
                        }
                    }
                }
                out[k] = acc * inv_dx2 * self.inv_sqrt_g[k];
            }
        }
        out
    }
}

fn h_of(metric: &Sym2, sqrt_g: f64) -> Sym2 {
    metric.scale(sqrt_g)
}

/// `h^AB` at the `i + ½` faces (`nx − 1` per row) and at the `j + ½`
/// faces (`ny − 1` rows of `nx`).
fn face_values(metric: &MetricField, rule: HalfNodeRule) -> (Vec<Sym2>, Vec<Sym2>) {
    let g = metric.grid;
    let h_node: Vec<Sym2> = metric
        .upper
        .iter()
        .zip(&metric.sqrt_g)
        .map(|(u, s)| h_of(u, *s))
        .collect();
    let at = |x: f64, y: f64, a: usize, b: usize| -> Sym2 {
        match rule {
            HalfNodeRule::Analytic => {
                let m = induced_metric(&metric.spec, x, y).expect("analytic surface");
                h_of(&m.upper, m.sqrt_g)
            }
            HalfNodeRule::Average => {
                let (p, q) = (h_node[a], h_node[b]);
                Sym2 {
                    xx: 0.5 * (p.xx + q.xx),
                    xy: 0.5 * (p.xy + q.xy),
                    yy: 0.5 * (p.yy + q.yy),
                }
            }
        }
    };
    let fx: Vec<Sym2> = (0..g.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..g.nx - 1).map(move |i| {
                at(
                    g.x(i) + 0.5 * g.dx,
                    g.y(j),
                    g.index(i, j),
                    g.index(i + 1, j),
                )
            })
        })
        .collect();
    let fy: Vec<Sym2> = (0..g.ny - 1)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..g.nx).map(move |i| {
                at(
                    g.x(i),
                    g.y(j) + 0.5 * g.dx,
                    g.index(i, j),
                    g.index(i, j + 1),
                )
            })
        })
        .collect();
    (fx, fy)
}

/// Builds the coefficient table once for a metric. The analytic rule is
/// used whenever the surface has closed-form shape and fiber angle.
pub fn build_stencil(metric: &MetricField) -> StencilTable {
    let rule = if metric.spec.is_analytic() {
        HalfNodeRule::Analytic
    } else {
        HalfNodeRule::Average
    };
    build_stencil_with(metric, rule)
}

pub fn build_stencil_with(metric: &MetricField, rule: HalfNodeRule) -> StencilTable {
    let g = metric.grid;
    assert!(g.nx >= 3 && g.ny >= 3, "stencil needs at least 3x3 nodes");
    let (fx, fy) = face_values(metric, rule);
    let mut coeffs: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; g.len()]);

    // Each face flux enters its left/lower node with `+` and its
    // right/upper node with `−`. `add(node, di, dj, value)` adds `value` to
    // the coefficient multiplying `u` at `node + (di, dj)`.
    let mut add = |i: usize, j: usize, di: i32, dj: i32, value: f64| {
        coeffs[slot(di, dj)][g.index(i, j)] += value;
    };
    for j in 0..g.ny {
        let tangential = j > 0 && j + 1 < g.ny;
        for i in 0..g.nx - 1 {
            let h = fx[j * (g.nx - 1) + i];
            let q = if tangential { 0.25 * h.xy } else { 0.0 };
            // Flux F through face i+½ seen from node i (sign +) and i+1 (sign −).
            for (node, sign, off) in [(i, 1.0, 0i32), (i + 1, -1.0, -1i32)] {
                add(node, j, off + 1, 0, sign * h.xx);
                add(node, j, off, 0, -sign * h.xx);
                if tangential {
                    add(node, j, off + 1, 1, sign * q);
                    add(node, j, off, 1, sign * q);
                    add(node, j, off + 1, -1, -sign * q);
                    add(node, j, off, -1, -sign * q);
                }
            }
        }
    }
    for j in 0..g.ny - 1 {
        for i in 0..g.nx {
            let tangential = i > 0 && i + 1 < g.nx;
            let h = fy[j * g.nx + i];
            let q = if tangential { 0.25 * h.xy } else { 0.0 };
            for (node, sign, off) in [(j, 1.0, 0i32), (j + 1, -1.0, -1i32)] {
                add(i, node, 0, off + 1, sign * h.yy);
                add(i, node, 0, off, -sign * h.yy);
                if tangential {
                    add(i, node, 1, off + 1, sign * q);
                    add(i, node, 1, off, sign * q);
                    add(i, node, -1, off + 1, -sign * q);
                    add(i, node, -1, off, -sign * q);
                }
            }
        }
    }
    let inv_sqrt_g = metric.sqrt_g.iter().map(|s| 1.0 / s).collect();
    StencilTable {
        grid: g,
        coeffs,
        inv_sqrt_g,
        rule,
    }
}
