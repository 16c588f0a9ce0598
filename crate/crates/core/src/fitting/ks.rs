//! One-sample Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};

use super::FitError;
use crate::model::PleDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub candidate: PleDistribution,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub n_points: usize,
}

/// `sup |F_n(x) - F(x)|` for the empirical cdf of `data` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let below = f - i as f64 / n;
        let above = (i + 1) as f64 / n - f;
        acc.max(below).max(above)
    })
}

/// Survival function `P(K > lambda)` of the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form converges fast for small arguments.
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let w = (2.0 * std::f64::consts::PI).sqrt() / lambda;
        let cdf = w * (y + y.powi(9) + y.powi(25) + y.powi(49));
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS statistic and asymptotic p-value of `data` against `candidate`.
///
/// The p-value uses Stephens' effective-sample-size correction; below about
/// ten points it is only indicative.
pub fn ks_test(data: &[f64], candidate: &PleDistribution) -> Result<FitReport, FitError> {
    if data.is_empty() {
        return Err(FitError::TooFewPoints { n: 0, min: 1 });
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    if data.len() < 10 {
        log::warn!("KS p-value with only {} points is unreliable", data.len());
    }
    let d = ks_statistic(data, |x| candidate.cdf(x));
    let sqrt_n = (data.len() as f64).sqrt();
    let p = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    Ok(FitReport { candidate: *candidate, ks_statistic: d, ks_p_value: p, n_points: data.len() })
}
