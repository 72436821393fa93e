//! Split of the curvature scalar into a shape part and a fiber part:
//! `𝓡 = d_T 𝓡_shape + (d_L − d_T) 𝓡_aniso`, with `𝓡_shape` the curvature of
//! the isotropic surface metric `G` and `𝓡_aniso = −2 div_G[e_L div_G e_L]`.

use super::curvature::{christoffel_and_ricci, edge_flags, node_angles, node_slopes};
use super::finite_diff::partial;
use super::frame::fiber_vector;
use super::taylor::{Real, Taylor};
use super::{DerivativeMode, GeometryError, SurfaceSpec};
use crate::grid::Grid;

#[derive(Clone, Debug)]
pub struct RicciDecomposition {
    pub grid: Grid,
    pub shape: Vec<f64>,
    pub aniso: Vec<f64>,
    pub reduced_accuracy: Vec<bool>,
}

impl RicciDecomposition {
    /// `d_T 𝓡_shape + (d_L − d_T) 𝓡_aniso` at every node.
    pub fn recombine(&self, d_l: f64, d_t: f64) -> Vec<f64> {
        self.shape
            .iter()
            .zip(&self.aniso)
            .map(|(s, a)| d_t * s + (d_l - d_t) * a)
            .collect()
    }
}

/// Chart components `(e^1, e^2)` of the fiber vector and `√G` of the
/// isotropic surface metric.
fn fiber_components<T: Real>(fx: T, fy: T, alpha: T) -> ([T; 2], T) {
    let e = fiber_vector(fx, fy, alpha);
    let sqrt_big_g = (T::cst(1.0) + fx * fx + fy * fy).sqrt();
    ([e[0], e[1]], sqrt_big_g)
}

fn aniso_at(spec: &SurfaceSpec, x: f64, y: f64) -> Option<f64> {
    let tx = Taylor::var_x(x, 2);
    let ty = Taylor::var_y(y, 2);
    let (fx, fy) = spec.shape.slopes(tx, ty)?;
    let alpha = spec.fiber.angle(tx, ty)?;
    let (e, sg) = fiber_components(fx, fy, alpha);
    let div_e = ((sg * e[0]).derivative(0) + (sg * e[1]).derivative(1)) / sg;
    let flux = [sg * div_e * e[0], sg * div_e * e[1]];
    let div = (flux[0].derivative(0) + flux[1].derivative(1)) / sg;
    Some(-2.0 * div.value())
}

pub fn ricci_decomposition(
    spec: &SurfaceSpec,
    mode: DerivativeMode,
) -> Result<RicciDecomposition, GeometryError> {
    let grid = spec.grid();
    let shape = christoffel_and_ricci(&spec.isotropic_auxiliary(), mode)?.ricci;
    let (aniso, flags) = match mode {
        DerivativeMode::Analytic => {
            let a = grid.sample(|x, y| aniso_at(spec, x, y).expect("analytic spec"));
            (a, vec![false; grid.len()])
        }
        DerivativeMode::FiniteDifference => {
            let (fx, fy) = node_slopes(spec, &grid);
            let alpha = node_angles(spec, &grid);
            let n = grid.len();
            let mut m = [vec![0.0; n], vec![0.0; n]];
            let mut e = [vec![0.0; n], vec![0.0; n]];
            let mut sg = vec![0.0; n];
            for k in 0..n {
                let (ek, s) = fiber_components(fx[k], fy[k], alpha[k]);
                sg[k] = s;
                for c in 0..2 {
                    e[c][k] = ek[c];
                    m[c][k] = s * ek[c];
                }
            }
            let d0 = partial(&grid, &m[0], 0);
            let d1 = partial(&grid, &m[1], 1);
            let div_e: Vec<f64> = (0..n).map(|k| (d0[k] + d1[k]) / sg[k]).collect();
            let flux: Vec<Vec<f64>> = (0..2)
                .map(|c| (0..n).map(|k| sg[k] * div_e[k] * e[c][k]).collect())
                .collect();
            let f0 = partial(&grid, &flux[0], 0);
            let f1 = partial(&grid, &flux[1], 1);
            let aniso = (0..n).map(|k| -2.0 * (f0[k] + f1[k]) / sg[k]).collect();
            let passes = if spec.shape.is_analytic() { 2 } else { 3 };
            (aniso, edge_flags(&grid, passes))
        }
    };
    Ok(RicciDecomposition {
        grid,
        shape,
        aniso,
        reduced_accuracy: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FiberConfig, ShapeConfig, SurfaceConfig};
    use std::f64::consts::PI;

    fn spec(shape: ShapeConfig, rate: f64, d_l: f64) -> SurfaceSpec {
        SurfaceSpec::analytic(SurfaceConfig {
            shape,
            fiber: FiberConfig::Linear { alpha0: 0.0, rate },
            d_l,
            d_t: 1.0,
            d0: 1.0,
            length: 10.0,
            dx: 0.25,
        })
        .unwrap()
    }

    #[test]
    fn isotropic_case_reduces_to_shape_term() {
        let s = spec(
            ShapeConfig::Paraboloid {
                coefficient: 0.1,
                sign: -1.0,
            },
            0.2,
            1.0,
        );
        let d = ricci_decomposition(&s, DerivativeMode::Analytic).unwrap();
        let full = christoffel_and_ricci(&s, DerivativeMode::Analytic).unwrap();
        for (r, s) in full.ricci.iter().zip(&d.shape) {
            assert!((r - s).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_with_linear_rotation() {
        let b = PI / 40.0;
        let s = spec(ShapeConfig::Plane, b, 4.0);
        let d = ricci_decomposition(&s, DerivativeMode::Analytic).unwrap();
        let g = d.grid;
        for j in (0..g.ny).step_by(7) {
            for i in (0..g.nx).step_by(5) {
                let k = g.index(i, j);
                let alpha = b * (g.x(i) + g.y(j));
                assert!(d.shape[k].abs() < 1e-14);
                assert!((3.0 * d.aniso[k] - 12.0 * b * b * (2.0 * alpha).sin()).abs() < 1e-14);
            }
        }
    }
}
