use serde::{Deserialize, Serialize};

use super::{FitError, PathLossSample};
use crate::units::REFERENCE_DISTANCE_M;

/// Least-squares log-distance fit and its residual statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub gamma_hat: f64,
    pub intercept: f64,
    /// Mean of `measured - model`, dB.
    pub mean_residual: f64,
    /// Sample standard deviation of the residuals, dB.
    pub residual_std: f64,
    pub n_points: usize,
}

/// Ordinary least squares of path loss against `10 log10(d / d0)`.
///
/// With `fixed_intercept` the intercept is held and only the slope is
/// estimated (regression through the anchored point).
pub fn fit_log_distance(samples: &[PathLossSample], fixed_intercept: Option<f64>) -> Result<RegressionFit, FitError> {
    let n = samples.len();
    if n < 2 {
        return Err(FitError::TooFewPoints { n, min: 2 });
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for s in samples {
        if !(s.distance_m > 0.0 && s.distance_m.is_finite() && s.path_loss_db.is_finite()) {
            return Err(FitError::NonFinite);
        }
        xs.push(10.0 * (s.distance_m / REFERENCE_DISTANCE_M).log10());
        ys.push(s.path_loss_db);
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let sxx_centered: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx_centered <= f64::EPSILON * nf * (1.0 + x_mean * x_mean) {
        return Err(FitError::RankDeficient);
    }

    let (gamma_hat, intercept) = match fixed_intercept {
        Some(a) => {
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * (y - a)).sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            (sxy / sxx, a)
        }
        None => {
            let y_mean = ys.iter().sum::<f64>() / nf;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
            let slope = sxy / sxx_centered;
            (slope, y_mean - slope * x_mean)
        }
    };

    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + gamma_hat * x)).collect();
    let mean_residual = residuals.iter().sum::<f64>() / nf;
    let residual_std = (residuals.iter().map(|r| (r - mean_residual).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();

    Ok(RegressionFit { gamma_hat, intercept, mean_residual, residual_std, n_points: n })
}
