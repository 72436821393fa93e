//! Least-squares estimates of the drift and frequency coefficients.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::MobilityError;
use crate::driftlaw::{CurvatureSource, DriftPath, MobilityCoefficients};

/// Estimates of `(q1, q2)` with their covariance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityFit {
    pub q1: f64,
    pub q2: f64,
    pub covariance: [[f64; 2]; 2],
    /// Euclidean norm of the velocity residuals.
    pub residual_norm: f64,
    /// Velocity estimates used.
    pub samples: usize,
    /// Ratio of the extreme eigenvalues of the normal matrix.
    pub condition: f64,
}

impl MobilityFit {
    pub fn std_errors(&self) -> [f64; 2] {
        [self.covariance[0][0].sqrt(), self.covariance[1][1].sqrt()]
    }
}

/// Regresses midpoint velocities of the centre paths on the two basis fields
/// `−g^{AB}∂_B𝓡` and `−g^{−1/2}ε^{BA}∂_B𝓡`.
pub fn fit_mobility(
    paths: &[DriftPath],
    source: &dyn CurvatureSource,
) -> Result<MobilityFit, MobilityError> {
    let e1 = MobilityCoefficients::drift(1.0, 0.0);
    let e2 = MobilityCoefficients::drift(0.0, 1.0);
    let mut rows: Vec<([f64; 2], [f64; 2], [f64; 2])> = Vec::new();
    for path in paths {
        for w in path.samples.windows(2) {
            let h = w[1].t - w[0].t;
            if h <= 0.0 {
                continue;
            }
            let (xm, ym) = (0.5 * (w[0].x + w[1].x), 0.5 * (w[0].y + w[1].y));
            let local = source.local(xm, ym)?;
            let b1 = crate::driftlaw::velocity_from(&local, &e1);
            let b2 = crate::driftlaw::velocity_from(&local, &e2);
            rows.push((b1, b2, [(w[1].x - w[0].x) / h, (w[1].y - w[0].y) / h]));
        }
    }
    let n = rows.len();
    if n < 2 {
        return Err(MobilityError::RankDeficient(
            "fewer than two velocity estimates".into(),
        ));
    }
    let norms: Vec<f64> = rows.iter().map(|r| r.0[0].hypot(r.0[1])).collect();
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let active = norms
        .iter()
        .filter(|&&v| v > 1e-9 * max_norm && v > 0.0)
        .count();
    if max_norm == 0.0 || 2 * active < n {
        return Err(MobilityError::RankDeficient(format!(
            "curvature gradient vanishes at {} of {n} path points",
            n - active
        )));
    }
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for (b1, b2, v) in &rows {
        for k in 0..2 {
            let a = Vector2::new(b1[k], b2[k]);
            ata += a * a.transpose();
            atb += a * v[k];
        }
    }
    let eig = ata.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 1e-12 * hi) {
        return Err(MobilityError::RankDeficient(
            "the two basis fields are collinear along the paths".into(),
        ));
    }
    let inv = ata.try_inverse().expect("positive definite");
    let q = inv * atb;
    let rss: f64 = rows
        .iter()
        .map(|(b1, b2, v)| {
            (0..2)
                .map(|k| (v[k] - q[0] * b1[k] - q[1] * b2[k]).powi(2))
                .sum::<f64>()
        })
        .sum();
    let dof = (2 * n).saturating_sub(2).max(1) as f64;
    let cov = inv * (rss / dof);
    Ok(MobilityFit {
        q1: q[0],
        q2: q[1],
        covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        residual_norm: rss.sqrt(),
        samples: n,
        condition: hi / lo,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyFit {
    pub q0: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Slope of `ω = 2π/T` against `𝓡` with the intercept held at `omega0`.
pub fn fit_q0(periods: &[f64], ricci: &[f64], omega0: f64) -> Result<FrequencyFit, MobilityError> {
    assert_eq!(periods.len(), ricci.len(), "one curvature value per period");
    let n = periods.len();
    let max_abs = ricci.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let lo = ricci.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ricci.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if n < 2 || !(hi - lo >= 0.1 * max_abs) || max_abs == 0.0 {
        return Err(MobilityError::InsufficientVariation {
            spread: (hi - lo).max(0.0),
            max_abs,
        });
    }
    let y: Vec<f64> = periods
        .iter()
        .map(|t| std::f64::consts::TAU / t - omega0)
        .collect();
    let srr: f64 = ricci.iter().map(|r| r * r).sum();
    let q0 = ricci.iter().zip(&y).map(|(r, y)| r * y).sum::<f64>() / srr;
    let rss: f64 = ricci
        .iter()
        .zip(&y)
        .map(|(r, y)| (y - q0 * r).powi(2))
        .sum();
    let var = if n > 1 {
        rss / (n - 1) as f64 / srr
    } else {
        0.0
    };
    Ok(FrequencyFit {
        q0,
        std_error: var.sqrt(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q0_round_trip() {
        let r: Vec<f64> = (0..20).map(|k| 0.01 + 0.004 * k as f64).collect();
        let p: Vec<f64> = r
            .iter()
            .map(|r| std::f64::consts::TAU / (1.3 + 0.5 * r))
            .collect();
        let f = fit_q0(&p, &r, 1.3).unwrap();
        assert!((f.q0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_curvature_rejected() {
        let r = vec![0.02; 10];
        let p = vec![4.9; 10];
        assert!(matches!(
            fit_q0(&p, &r, 1.28),
            Err(MobilityError::InsufficientVariation { .. })
        ));
    }
}
