//! Derivative-free minimization (Nelder–Mead with restarts).

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Converged when the objective spread over the simplex drops below
    /// `f_tolerance * (1 + |f_best|)` and the simplex diameter below `x_tolerance`.
    pub f_tolerance: f64,
    pub x_tolerance: f64,
    /// Restarts from the current best point until a restart no longer improves it.
    pub max_restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evaluations: 20_000, f_tolerance: 1e-11, x_tolerance: 1e-8, max_restarts: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective spread over the final simplex.
    pub spread: f64,
}

/// Minimizes `f` from `start` with initial simplex steps `steps`.
///
/// Non-finite objective values are treated as `+inf`, which lets callers
/// encode constraints by returning `inf` outside the feasible region. `start`
/// must be feasible.
pub fn nelder_mead<F>(mut f: F, start: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best = start.to_vec();
    let mut best_value = eval(&best);
    let mut evaluations = 1;
    let mut last = Minimum { x: best.clone(), value: best_value, evaluations, converged: false, spread: f64::INFINITY };
    let mut scale = 1.0;
    for _ in 0..=opts.max_restarts {
        let run_steps: Vec<f64> = steps.iter().map(|s| s * scale).collect();
        let run = simplex_search(&mut eval, &best, best_value, &run_steps, opts, evaluations);
        evaluations = run.evaluations;
        let improved = best_value - run.value > opts.f_tolerance * (1.0 + best_value.abs());
        if run.value <= best_value {
            best = run.x.clone();
            best_value = run.value;
        }
        last =
            Minimum { x: best.clone(), value: best_value, evaluations, converged: run.converged, spread: run.spread };
        if !improved && run.converged {
            break;
        }
        if evaluations >= opts.max_evaluations {
            break;
        }
        // Shrink the restart simplex so later passes polish locally.
        scale *= 0.5;
    }
    last
}

fn simplex_search<F>(
    eval: &mut F,
    start: &[f64],
    start_value: f64,
    steps: &[f64],
    opts: &NelderMeadOptions,
    mut evaluations: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), start_value));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += steps[i];
        let mut v = eval(&x);
        evaluations += 1;
        if !v.is_finite() {
            // Step out of the feasible region; try the other direction.
            x[i] = start[i] - steps[i];
            v = eval(&x);
            evaluations += 1;
        }
        simplex.push((x, v));
    }

    let mut converged = false;
    let mut spread = f64::INFINITY;
    while evaluations < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let f_tol = opts.f_tolerance * (1.0 + simplex[0].1.abs());
        if spread.is_finite() && spread <= f_tol && diameter <= opts.x_tolerance {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along =
            |t: f64, worst: &[f64]| -> Vec<f64> { centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect() };

        let worst = simplex[n].0.clone();
        let worst_value = simplex[n].1;
        let reflected = along(REFLECT, &worst);
        let fr = eval(&reflected);
        evaluations += 1;

        if fr < simplex[0].1 {
            let expanded = along(EXPAND, &worst);
            let fe = eval(&expanded);
            evaluations += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst_value {
            let x = along(CONTRACT, &worst);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(-CONTRACT, &worst);
            let v = eval(&x);
            (x, v)
        };
        evaluations += 1;
        if fc < worst_value.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            *v = eval(x);
            evaluations += 1;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evaluations, converged, spread }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn respects_infeasible_region() {
        // Minimum of (x - 2)^2 constrained to x < 1 sits on the boundary.
        let f = |x: &[f64]| if x[0] < 1.0 { (x[0] - 2.0).powi(2) } else { f64::INFINITY };
        let m = nelder_mead(f, &[0.0], &[0.3], &NelderMeadOptions::default());
        assert!(m.x[0] < 1.0 && m.x[0] > 0.999);
    }
}
