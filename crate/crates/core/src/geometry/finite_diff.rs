//! Finite-difference partials and interpolation on node grids.

use crate::grid::Grid;

/// `∂/∂x` (`axis == 0`) or `∂/∂y` (`axis == 1`) of a node field.
///
/// Centered fourth order where the five-point stencil fits, centered second
/// order one node in from an edge, one-sided second order on the edge.
pub fn partial(grid: &Grid, data: &[f64], axis: usize) -> Vec<f64> {
    assert_eq!(data.len(), grid.len());
    let (n, stride) = if axis == 0 {
        (grid.nx, 1)
    } else {
        (grid.ny, grid.nx)
    };
    let h = grid.dx;
    let mut out = vec![0.0; data.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let idx = grid.index(i, j);
            let k = if axis == 0 { i } else { j };
            let f = |o: isize| data[(idx as isize + o * stride as isize) as usize];
            out[idx] = if n < 3 {
                0.0
            } else if k == 0 {
                (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h)
            } else if k == 1 || k == n - 2 {
                (f(1) - f(-1)) / (2.0 * h)
            } else {
                (-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h)
            };
        }
    }
    out
}

/// Bilinear interpolation; the point must lie inside the grid rectangle.
pub fn bilinear(grid: &Grid, data: &[f64], x: f64, y: f64) -> f64 {
    let (fi, fj) = grid.locate(x, y);
    let i = (fi.floor() as usize).min(grid.nx - 2);
    let j = (fj.floor() as usize).min(grid.ny - 2);
    let s = fi - i as f64;
    let t = fj - j as f64;
    let v00 = data[grid.index(i, j)];
    let v10 = data[grid.index(i + 1, j)];
    let v01 = data[grid.index(i, j + 1)];
    let v11 = data[grid.index(i + 1, j + 1)];
    (1.0 - t) * ((1.0 - s) * v00 + s * v10) + t * ((1.0 - s) * v01 + s * v11)
}

/// Keys cubic-convolution weights and their derivatives for offset `s ∈ [0,1)`
/// relative to nodes `-1, 0, 1, 2`.
fn cubic_weights(s: f64) -> ([f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    let w = [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ];
    let dw = [
        0.5 * (-3.0 * s2 + 4.0 * s - 1.0),
        0.5 * (9.0 * s2 - 10.0 * s),
        0.5 * (-9.0 * s2 + 8.0 * s + 1.0),
        0.5 * (3.0 * s2 - 2.0 * s),
    ];
    (w, dw)
}

/// Bicubic (cubic-convolution) interpolation returning the value and the
/// physical gradient of the interpolant. Stencil nodes beyond the grid are
/// clamped to the edge.
pub fn bicubic(grid: &Grid, data: &[f64], x: f64, y: f64) -> (f64, [f64; 2]) {
    let (fi, fj) = grid.locate(x, y);
    let i = (fi.floor().max(0.0) as usize).min(grid.nx - 2);
    let j = (fj.floor().max(0.0) as usize).min(grid.ny - 2);
    let (wx, dwx) = cubic_weights(fi - i as f64);
    let (wy, dwy) = cubic_weights(fj - j as f64);
    let clamp = |k: isize, n: usize| k.clamp(0, n as isize - 1) as usize;
    let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
    for b in 0..4 {
        let jj = clamp(j as isize + b as isize - 1, grid.ny);
        for a in 0..4 {
            let ii = clamp(i as isize + a as isize - 1, grid.nx);
            let f = data[grid.index(ii, jj)];
            v += wx[a] * wy[b] * f;
            gx += dwx[a] * wy[b] * f;
            gy += wx[a] * dwy[b] * f;
        }
    }
    (v, [gx / grid.dx, gy / grid.dx])
}
