//! Christoffel symbols and the Ricci curvature scalar of the diffusion metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::finite_diff::partial;
use super::frame::{surface_metric, InducedMetric, Sym2};
use super::taylor::{Real, Taylor};
use super::{GeometryError, Shape, SurfaceSpec};
use crate::grid::{FieldDump, Grid};

/// How metric derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Exact derivatives of the closed-form shape and fiber angle.
    Analytic,
    /// Centered finite differences of node-sampled quantities.
    FiniteDifference,
}

/// `Γ^A_BC`, stored once per symmetric lower pair `(11, 12, 22)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Christoffel(pub [[f64; 3]; 2]);

impl Christoffel {
    fn pair(b: usize, c: usize) -> usize {
        b + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.0[a][Self::pair(b, c)]
    }
}

/// 2D alternating symbol with `ε₁₂ = +1`.
pub fn levi_civita(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

/// Geometry sampled on the simulation grid.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub grid: Grid,
    pub lower: Vec<Sym2>,
    pub upper: Vec<Sym2>,
    pub sqrt_g: Vec<f64>,
    pub christoffel: Vec<Christoffel>,
    pub ricci: Vec<f64>,
    /// Nodes whose derivatives fell back to low-order edge stencils.
    pub reduced_accuracy: Vec<bool>,
    pub mode: DerivativeMode,
    pub spec: SurfaceSpec,
}

impl MetricField {
    pub fn levi_civita(&self, a: usize, b: usize) -> f64 {
        levi_civita(a, b)
    }

    pub fn metric_at_node(&self, idx: usize) -> InducedMetric {
        InducedMetric {
            lower: self.lower[idx],
            upper: self.upper[idx],
            sqrt_g: self.sqrt_g[idx],
        }
    }

    /// Dump with the metric components and the curvature scalar.
    pub fn to_dump(&self) -> FieldDump {
        let pick = |f: fn(&Sym2) -> f64, v: &[Sym2]| v.iter().map(f).collect::<Vec<_>>();
        FieldDump::new(self.grid)
            .with_field("g11", pick(|s| s.xx, &self.lower))
            .with_field("g12", pick(|s| s.xy, &self.lower))
            .with_field("g22", pick(|s| s.yy, &self.lower))
            .with_field("sqrt_g", self.sqrt_g.clone())
            .with_field("ricci", self.ricci.clone())
    }
}

/// Curvature data at a single point computed from exact derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCurvature {
    pub metric: InducedMetric,
    pub christoffel: Christoffel,
    pub ricci: f64,
    /// `(∂ₓ𝓡, ∂ᵧ𝓡)`, present when requested.
    pub ricci_gradient: Option<[f64; 2]>,
}

/// Metric as Taylor series of the requested order at `(x, y)`.
fn metric_series(spec: &SurfaceSpec, x: f64, y: f64, order: u8) -> Option<[[Taylor; 2]; 2]> {
    let tx = Taylor::var_x(x, order);
    let ty = Taylor::var_y(y, order);
    let (fx, fy) = spec.shape.slopes(tx, ty)?;
    let alpha = spec.fiber.angle(tx, ty)?;
    let [g11, g12, g22] = surface_metric(fx, fy, alpha, spec.d_l, spec.d_t);
    Some([[g11, g12], [g12, g22]])
}

/// Christoffel symbols from the metric inverse and first derivatives
/// `dg[k][i][j] = ∂_k g_ij`.
fn christoffel_from<T: Real>(inv: &[[T; 2]; 2], dg: &[[[T; 2]; 2]; 2]) -> [[[T; 2]; 2]; 2] {
    let half = T::cst(0.5);
    let mut gamma = [[[T::cst(0.0); 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let term = |d: usize| inv[a][d] * (dg[b][c][d] + dg[c][b][d] - dg[d][b][c]);
                gamma[a][b][c] = half * (term(0) + term(1));
            }
        }
    }
    gamma
}

fn inverse_series(g: &[[Taylor; 2]; 2]) -> [[Taylor; 2]; 2] {
    let inv_det = Taylor::constant(1.0) / (g[0][0] * g[1][1] - g[0][1] * g[0][1]);
    [
        [g[1][1] * inv_det, -g[0][1] * inv_det],
        [-g[0][1] * inv_det, g[0][0] * inv_det],
    ]
}

/// Exact curvature at a point. Fails for tabulated specs.
pub fn curvature_at(
    spec: &SurfaceSpec,
    x: f64,
    y: f64,
    with_gradient: bool,
) -> Result<PointCurvature, GeometryError> {
    let order = if with_gradient { 3 } else { 2 };
    let g = metric_series(spec, x, y, order).ok_or(GeometryError::NotAnalytic)?;
    let inv = inverse_series(&g);
    let mut dg = [[[Taylor::constant(0.0); 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                dg[k][i][j] = g[i][j].derivative(k);
            }
        }
    }
    let gamma = christoffel_from(&inv, &dg);
    let mut r = Taylor::constant(0.0);
    for b in 0..2 {
        for c in 0..2 {
            let mut s = Taylor::constant(0.0);
            for a in 0..2 {
                s = s + gamma[a][b][c].derivative(a) - gamma[a][a][b].derivative(c);
                for d in 0..2 {
                    s = s + gamma[a][a][d] * gamma[d][b][c] - gamma[a][c][d] * gamma[d][a][b];
                }
            }
            r = r + inv[b][c] * s;
        }
    }
    let lower = Sym2 {
        xx: g[0][0].value(),
        xy: g[0][1].value(),
        yy: g[1][1].value(),
    };
    let mut ch = Christoffel::default();
    for a in 0..2 {
        ch.0[a] = [
            gamma[a][0][0].value(),
            gamma[a][0][1].value(),
            gamma[a][1][1].value(),
        ];
    }
    Ok(PointCurvature {
        metric: InducedMetric::from_lower(lower),
        christoffel: ch,
        ricci: r.value(),
        ricci_gradient: with_gradient.then(|| r.gradient()),
    })
}

/// Node-sampled shape slopes: closed form for built-in shapes, finite
/// differences of the samples otherwise.
pub(crate) fn node_slopes(spec: &SurfaceSpec, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    match &spec.shape {
        Shape::Tabulated(t) => (t.d_dx.to_vec(), t.d_dy.to_vec()),
        s => {
            let fx = grid.sample(|x, y| s.slopes(x, y).expect("analytic").0);
            let fy = grid.sample(|x, y| s.slopes(x, y).expect("analytic").1);
            (fx, fy)
        }
    }
}

pub(crate) fn node_angles(spec: &SurfaceSpec, grid: &Grid) -> Vec<f64> {
    match &spec.fiber {
        super::FiberAngle::Tabulated(t) => t.values.to_vec(),
        f => grid.sample(|x, y| f.angle(x, y).expect("analytic")),
    }
}

/// Number of nodes from each edge affected by edge stencils after
/// `passes` nested finite-difference derivatives.
pub(crate) fn edge_flags(grid: &Grid, passes: usize) -> Vec<bool> {
    let reach = 2 * passes;
    let mut flags = vec![false; grid.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let d = i.min(j).min(grid.nx - 1 - i).min(grid.ny - 1 - j);
            flags[grid.index(i, j)] = d < reach;
        }
    }
    flags
}

/// Builds the full metric field with Christoffel symbols and curvature.
pub fn christoffel_and_ricci(
    spec: &SurfaceSpec,
    mode: DerivativeMode,
) -> Result<MetricField, GeometryError> {
    let grid = spec.grid();
    match mode {
        DerivativeMode::Analytic => {
            if !spec.is_analytic() {
                return Err(GeometryError::NotAnalytic);
            }
            let points: Vec<PointCurvature> = (0..grid.len())
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx % grid.nx, idx / grid.nx);
                    curvature_at(spec, grid.x(i), grid.y(j), false).expect("analytic spec")
                })
                .collect();
            Ok(MetricField {
                grid,
                lower: points.iter().map(|p| p.metric.lower).collect(),
                upper: points.iter().map(|p| p.metric.upper).collect(),
                sqrt_g: points.iter().map(|p| p.metric.sqrt_g).collect(),
                christoffel: points.iter().map(|p| p.christoffel).collect(),
                ricci: points.iter().map(|p| p.ricci).collect(),
                reduced_accuracy: vec![false; grid.len()],
                mode,
                spec: spec.clone(),
            })
        }
        DerivativeMode::FiniteDifference => Ok(finite_difference_field(spec, &grid)),
    }
}

fn finite_difference_field(spec: &SurfaceSpec, grid: &Grid) -> MetricField {
    let (fx, fy) = node_slopes(spec, grid);
    let alpha = node_angles(spec, grid);
    let lower: Vec<Sym2> = (0..grid.len())
        .map(|k| {
            let [xx, xy, yy] = surface_metric(fx[k], fy[k], alpha[k], spec.d_l, spec.d_t);
            Sym2 { xx, xy, yy }
        })
        .collect();
    let (christoffel, ricci) = fd_curvature(grid, &lower);
    let passes = if spec.shape.is_analytic() { 2 } else { 3 };
    let upper: Vec<Sym2> = lower.iter().map(Sym2::inverse).collect();
    MetricField {
        grid: *grid,
        sqrt_g: lower.iter().map(|g| g.det().sqrt()).collect(),
        upper,
        lower,
        christoffel,
        ricci,
        reduced_accuracy: edge_flags(grid, passes),
        mode: DerivativeMode::FiniteDifference,
        spec: spec.clone(),
    }
}

/// Christoffel symbols and curvature from node-sampled metric components.
pub(crate) fn fd_curvature(grid: &Grid, lower: &[Sym2]) -> (Vec<Christoffel>, Vec<f64>) {
    let comp = |f: fn(&Sym2) -> f64| lower.iter().map(f).collect::<Vec<_>>();
    let g = [comp(|s| s.xx), comp(|s| s.xy), comp(|s| s.yy)];
    // dg[k][c] = ∂_k of component c (11, 12, 22)
    let dg: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|k| g.iter().map(|c| partial(grid, c, k)).collect())
        .collect();
    let pair = |i: usize, j: usize| i + j;
    let n = grid.len();
    let mut christoffel = vec![Christoffel::default(); n];
    for idx in 0..n {
        let inv = lower[idx].inverse();
        let inv = [[inv.xx, inv.xy], [inv.xy, inv.yy]];
        let mut d = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    d[k][i][j] = dg[k][pair(i, j)][idx];
                }
            }
        }
        let gamma = christoffel_from(&inv, &d);
        for a in 0..2 {
            christoffel[idx].0[a] = [gamma[a][0][0], gamma[a][0][1], gamma[a][1][1]];
        }
    }
    // ∂_k Γ^a_{p}, p indexing the symmetric pair
    let mut dgamma = vec![[[[0.0; 3]; 2]; 2]; n];
    for a in 0..2 {
        for p in 0..3 {
            let field: Vec<f64> = christoffel.iter().map(|c| c.0[a][p]).collect();
            for k in 0..2 {
                let d = partial(grid, &field, k);
                for idx in 0..n {
                    dgamma[idx][k][a][p] = d[idx];
                }
            }
        }
    }
    let ricci = (0..n)
        .map(|idx| {
            let inv = lower[idx].inverse();
            let gm = &christoffel[idx];
            let dgm = &dgamma[idx];
            let mut r = 0.0;
            for b in 0..2 {
                for c in 0..2 {
                    let mut s = 0.0;
                    for a in 0..2 {
                        s += dgm[a][a][pair(b, c)] - dgm[c][a][pair(a, b)];
                        for d in 0..2 {
                            s += gm.get(a, a, d) * gm.get(d, b, c)
                                - gm.get(a, c, d) * gm.get(d, a, b);
                        }
                    }
                    r += inv.get(b, c) * s;
                }
            }
            r
        })
        .collect();
    (christoffel, ricci)
}
