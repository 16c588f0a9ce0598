//! Maximum-likelihood fitting of the exponent distributions.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{digamma, gamma};

use super::optimize::{nelder_mead, NelderMeadOptions};
use super::FitError;
use crate::model::{Gev, PleDistribution};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Smallest sample accepted by the fitters.
    pub min_points: usize,
    pub optimizer: NelderMeadOptions,
    /// Newton iteration cap for the Beta shape parameters.
    pub max_newton_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_points: 50, optimizer: NelderMeadOptions::default(), max_newton_iterations: 200 }
    }
}

/// How the support `[a, b]` of a scaled Beta is chosen before the shapes are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SupportRule {
    /// Sample min/max widened on each side by `pad_fraction` of the range.
    SampleRange { pad_fraction: f64 },
    /// Known support; every sample must lie strictly inside it.
    Fixed { lower: f64, upper: f64 },
    /// Support by profile likelihood (full four-parameter fit), started from
    /// the padded sample range. Shapes are kept at or above 1 so the
    /// likelihood stays bounded.
    ProfileMle,
}

impl Default for SupportRule {
    fn default() -> Self {
        SupportRule::SampleRange { pad_fraction: 0.005 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionFit {
    pub distribution: PleDistribution,
    pub log_likelihood: f64,
    /// Objective evaluations (GEV) or Newton iterations (Beta).
    pub iterations: usize,
    pub n_points: usize,
}

fn validate(data: &[f64], min_points: usize) -> Result<(f64, f64), FitError> {
    if data.len() < min_points {
        return Err(FitError::TooFewPoints { n: data.len(), min: min_points });
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return Err(FitError::Degenerate);
    }
    Ok((lo, hi))
}

fn mean_var(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Probability-weighted-moment estimate of `(shape, scale, location)`.
fn gev_pwm_start(data: &[f64]) -> (f64, f64, f64) {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (i, x) in sorted.iter().enumerate() {
        let i = i as f64;
        b0 += x;
        b1 += x * i / (n - 1.0);
        b2 += x * i * (i - 1.0) / ((n - 1.0) * (n - 2.0));
    }
    b0 /= n;
    b1 /= n;
    b2 /= n;
    let c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - 2f64.ln() / 3f64.ln();
    // Hosking's shape has the opposite sign of ours.
    let kh = 7.8590 * c + 2.9554 * c * c;
    if kh.abs() < 1e-6 || !kh.is_finite() {
        let scale = (2.0 * b1 - b0) / 2f64.ln();
        return (0.0, scale, b0 - EULER_GAMMA * scale);
    }
    let g = gamma(1.0 + kh);
    let scale = (2.0 * b1 - b0) * kh / (g * (1.0 - 2f64.powf(-kh)));
    let location = b0 + scale * (g - 1.0) / kh;
    (-kh, scale, location)
}

fn gev_nll(data: &[f64], shape: f64, scale: f64, location: f64) -> f64 {
    // Below -1 the likelihood is unbounded at the sample maximum.
    if shape <= -1.0 || !(scale > 0.0) {
        return f64::INFINITY;
    }
    match Gev::new(shape, scale, location) {
        Ok(g) => -data.iter().map(|&x| g.ln_pdf(x)).sum::<f64>(),
        Err(_) => f64::INFINITY,
    }
}

/// Maximum-likelihood GEV fit, started from probability-weighted moments.
pub fn fit_gev(data: &[f64], opts: &FitOptions) -> Result<DistributionFit, FitError> {
    validate(data, opts.min_points.max(3))?;

    let (mut shape, mut scale, mut location) = gev_pwm_start(data);
    if !gev_nll(data, shape, scale, location).is_finite() {
        // PWM start can leave the sample maximum outside a bounded support;
        // the Gumbel moment start is always feasible.
        let (mean, var) = mean_var(data);
        scale = var.sqrt() * 6f64.sqrt() / std::f64::consts::PI;
        location = mean - EULER_GAMMA * scale;
        shape = 0.0;
    }

    let objective = |theta: &[f64]| gev_nll(data, theta[0], theta[1].exp(), theta[2]);
    let start = [shape, scale.ln(), location];
    let steps = [0.05, 0.1, 0.1 * scale];
    let min = nelder_mead(objective, &start, &steps, &opts.optimizer);
    if !min.converged || !min.value.is_finite() {
        return Err(FitError::NonConvergence {
            evaluations: min.evaluations,
            objective: min.value,
            spread: min.spread,
        });
    }
    let distribution = PleDistribution::gev(min.x[0], min.x[1].exp(), min.x[2])?;
    Ok(DistributionFit { distribution, log_likelihood: -min.value, iterations: min.evaluations, n_points: data.len() })
}

/// Trigamma function ψ'(x) for x > 0.
fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

/// Mean log-likelihood of Beta shapes on unit-interval data with sufficient
/// statistics `mean ln u` and `mean ln(1 - u)`.
fn beta_mean_ll(a1: f64, a2: f64, mean_ln_u: f64, mean_ln_1mu: f64) -> f64 {
    (a1 - 1.0) * mean_ln_u + (a2 - 1.0) * mean_ln_1mu - ln_beta(a1, a2)
}

/// Maximum-likelihood shapes of a Beta on `[0, 1]` data.
///
/// Returns `(alpha1, alpha2, iterations)`.
pub(crate) fn fit_unit_beta_shapes(unit: &[f64], max_iterations: usize) -> Result<(f64, f64, usize), FitError> {
    let n = unit.len() as f64;
    let s1 = unit.iter().map(|u| u.ln()).sum::<f64>() / n;
    let s2 = unit.iter().map(|u| (-u).ln_1p()).sum::<f64>() / n;

    let (m, v) = mean_var(unit);
    let common = m * (1.0 - m) / v - 1.0;
    let (mut a1, mut a2) = if common > 0.0 { (m * common, (1.0 - m) * common) } else { (1.0, 1.0) };

    let mut ll = beta_mean_ll(a1, a2, s1, s2);
    for it in 1..=max_iterations {
        let psi_sum = digamma(a1 + a2);
        let g1 = s1 - digamma(a1) + psi_sum;
        let g2 = s2 - digamma(a2) + psi_sum;
        let t_sum = trigamma(a1 + a2);
        let h11 = t_sum - trigamma(a1);
        let h22 = t_sum - trigamma(a2);
        let h12 = t_sum;
        let det = h11 * h22 - h12 * h12;
        if g1.abs().max(g2.abs()) < 1e-13 {
            return Ok((a1, a2, it));
        }
        // Newton direction -H⁻¹ g; H is negative definite for the Beta family.
        let mut d1 = -(h22 * g1 - h12 * g2) / det;
        let mut d2 = -(-h12 * g1 + h11 * g2) / det;
        if !(d1.is_finite() && d2.is_finite()) {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let (n1, n2) = (a1 + d1, a2 + d2);
            if n1 > 0.0 && n2 > 0.0 {
                let next = beta_mean_ll(n1, n2, s1, s2);
                if next >= ll - 1e-15 * ll.abs().max(1.0) {
                    a1 = n1;
                    a2 = n2;
                    ll = next;
                    accepted = true;
                    break;
                }
            }
            d1 *= 0.5;
            d2 *= 0.5;
        }
        if !accepted {
            // Step underflowed at the optimum.
            if g1.abs().max(g2.abs()) < 1e-8 {
                return Ok((a1, a2, it));
            }
            break;
        }
        if d1.abs() < 1e-14 * a1 && d2.abs() < 1e-14 * a2 {
            return Ok((a1, a2, it));
        }
    }
    Err(FitError::NonConvergence { evaluations: max_iterations, objective: -ll * n, spread: f64::NAN })
}

/// Mean log-likelihood of `data` on `[lower, upper]` with ML shapes.
fn profile_ll(data: &[f64], lower: f64, upper: f64, max_iterations: usize) -> Option<(f64, f64, f64)> {
    let width = upper - lower;
    let unit: Vec<f64> = data.iter().map(|x| (x - lower) / width).collect();
    let (a1, a2, _) = fit_unit_beta_shapes(&unit, max_iterations).ok()?;
    if a1 < 1.0 || a2 < 1.0 {
        return None;
    }
    let n = unit.len() as f64;
    let s1 = unit.iter().map(|u| u.ln()).sum::<f64>() / n;
    let s2 = unit.iter().map(|u| (-u).ln_1p()).sum::<f64>() / n;
    Some((beta_mean_ll(a1, a2, s1, s2) - width.ln(), a1, a2))
}

fn profile_support(data: &[f64], lo: f64, hi: f64, opts: &FitOptions) -> Result<(f64, f64), FitError> {
    let range = hi - lo;
    // Offsets of each end beyond the sample extremes, on a log scale.
    let ends = |theta: &[f64]| (lo - theta[0].exp() * range, hi + theta[1].exp() * range);
    let objective = |theta: &[f64]| {
        if theta.iter().any(|t| !(-14.0..=6.0).contains(t)) {
            return f64::INFINITY;
        }
        let (a, b) = ends(theta);
        match profile_ll(data, a, b, opts.max_newton_iterations) {
            Some((ll, _, _)) => -ll,
            None => f64::INFINITY,
        }
    };
    let start = [0.005f64.ln(), 0.005f64.ln()];
    let mut nm = opts.optimizer;
    nm.x_tolerance = 1e-6;
    let min = nelder_mead(objective, &start, &[1.0, 1.0], &nm);
    if !min.converged || !min.value.is_finite() {
        return Err(FitError::NonConvergence {
            evaluations: min.evaluations,
            objective: min.value,
            spread: min.spread,
        });
    }
    Ok(ends(&min.x))
}

/// Scaled Beta fit: support by `support`, then shapes by maximum likelihood
/// on the data mapped to `[0, 1]`.
pub fn fit_scaled_beta(data: &[f64], support: SupportRule, opts: &FitOptions) -> Result<DistributionFit, FitError> {
    let (lo, hi) = validate(data, opts.min_points.max(2))?;
    let (lower, upper) = match support {
        SupportRule::SampleRange { pad_fraction } => {
            let pad = pad_fraction.max(0.0) * (hi - lo);
            // A zero pad would put the extremes on the boundary.
            let pad = if pad > 0.0 { pad } else { 1e-9 * (hi - lo) };
            (lo - pad, hi + pad)
        }
        SupportRule::Fixed { lower, upper } => {
            if let Some(&value) = data.iter().find(|&&x| x <= lower || x >= upper) {
                return Err(FitError::OutsideSupport { value, lower, upper });
            }
            (lower, upper)
        }
        SupportRule::ProfileMle => profile_support(data, lo, hi, opts)?,
    };
    let width = upper - lower;
    let unit: Vec<f64> = data.iter().map(|x| (x - lower) / width).collect();
    let (a1, a2, iterations) = fit_unit_beta_shapes(&unit, opts.max_newton_iterations)?;
    let distribution = PleDistribution::scaled_beta(a1, a2, lower, upper)?;
    Ok(DistributionFit {
        log_likelihood: distribution.log_likelihood(data),
        distribution,
        iterations,
        n_points: data.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trigamma_known_values() {
        // ψ'(1) = π²/6, ψ'(1/2) = π²/2
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((trigamma(1.0) - pi2 / 6.0).abs() < 1e-12);
        assert!((trigamma(0.5) - pi2 / 2.0).abs() < 1e-12);
        assert!((trigamma(25.0) - 0.040_810_663_257_225_6).abs() < 1e-12);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let data = vec![2.5; 200];
        assert_eq!(fit_gev(&data, &FitOptions::default()), Err(FitError::Degenerate));
        assert_eq!(fit_scaled_beta(&data, SupportRule::default(), &FitOptions::default()), Err(FitError::Degenerate));
    }

    #[test]
    fn small_samples_are_refused() {
        let data: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(matches!(fit_gev(&data, &FitOptions::default()), Err(FitError::TooFewPoints { n: 20, min: 50 })));
    }

    #[test]
    fn fixed_support_must_contain_data() {
        let data: Vec<f64> = (0..100).map(|i| 1.0 + i as f64 / 100.0).collect();
        let err = fit_scaled_beta(&data, SupportRule::Fixed { lower: 0.0, upper: 1.5 }, &FitOptions::default());
        assert!(matches!(err, Err(FitError::OutsideSupport { .. })));
    }

    #[test]
    fn pwm_start_is_close_for_gev_data() {
        let truth = Gev::new(-0.31, 0.42, 2.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..20_000).map(|_| truth.sample(&mut rng)).collect();
        let (k, s, m) = gev_pwm_start(&data);
        assert!((k + 0.31).abs() < 0.1, "{k}");
        assert!((s - 0.42).abs() < 0.05, "{s}");
        assert!((m - 2.7).abs() < 0.05, "{m}");
    }

    #[test]
    fn sample_range_support_wraps_data() {
        let truth = PleDistribution::scaled_beta(3.0, 3.4, 2.2, 3.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<f64> = (0..5_000).map(|_| truth.sample(&mut rng)).collect();
        let fit = fit_scaled_beta(&data, SupportRule::default(), &FitOptions::default()).unwrap();
        let (lo, hi) = fit.distribution.support();
        let (dmin, dmax) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let pad = 0.005 * (dmax - dmin);
        assert!((lo - (dmin - pad)).abs() < 1e-12 && (hi - (dmax + pad)).abs() < 1e-12);
    }
}
