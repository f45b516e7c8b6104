//! Forecast pmfs: exact at one step, Monte Carlo beyond.
//!
//! The one-step pmf is the thinning/error convolution at the survival
//! probability the filter assigns to period `T + 1`. For `h ≥ 2`, paths are
//! simulated forward: each step thins the previous count, adds an error
//! draw and advances `logit α` with the model's own recursion.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::ErrorSpec;
use crate::error::{domain, Error, Result};
use crate::filter::GasParams;
use crate::math::{logistic, logit, pow_int};
use crate::models::ModelSpec;
use crate::score::Kernel;
use crate::series::CountSeries;
use crate::simulation::thin;

/// Smallest Monte Carlo sample accepted by [`forecast_mc`].
pub const MIN_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastDistribution {
    pub horizon: usize,
    /// `pmf[x]` estimates `P(y_{T+h} = x)`.
    pub pmf: Vec<f64>,
    pub point_mean: f64,
    pub point_median: u64,
    /// Monte Carlo sample size, 0 for exact forecasts.
    pub n_draws: usize,
    pub seed: Option<u64>,
}

impl ForecastDistribution {
    /// `p̂(x)`, zero outside the stored support.
    pub fn prob(&self, x: u64) -> f64 {
        self.pmf.get(x as usize).copied().unwrap_or(0.0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// State at the forecast origin: the last observation and the logit
/// survival probability for the next period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastOrigin {
    pub y_last: u64,
    pub lambda_next: f64,
}

impl ForecastOrigin {
    pub fn new(y_last: u64, alpha_next: f64) -> Self {
        ForecastOrigin { y_last, lambda_next: logit(alpha_next) }
    }

    /// Runs the model over `series` and returns the state after its last
    /// observation.
    pub fn from_series(model: &ModelSpec, series: &CountSeries) -> Result<Self> {
        let path = model.path(series)?;
        Ok(ForecastOrigin { y_last: series[series.len() - 1], lambda_next: path.next_lambda })
    }

    pub fn alpha_next(&self) -> f64 {
        logistic(self.lambda_next)
    }
}

/// Smallest `x` whose cdf reaches one half.
fn median_of(pmf: &[f64]) -> u64 {
    let mut cdf = 0.0;
    for (x, p) in pmf.iter().enumerate() {
        cdf += p;
        if cdf >= 0.5 {
            return x as u64;
        }
    }
    pmf.len().saturating_sub(1) as u64
}

/// Exact one-step pmf `Σ_k p_b(k, y_T, α) p_e(x - k)`.
pub fn forecast_exact_1(y_last: u64, alpha_next: f64, spec: &ErrorSpec) -> Result<ForecastDistribution> {
    let pmf = crate::score::predictive_pmf(y_last, alpha_next, spec)?;
    Ok(ForecastDistribution {
        horizon: 1,
        point_median: median_of(&pmf),
        pmf,
        point_mean: alpha_next * y_last as f64 + spec.mean(),
        n_draws: 0,
        seed: None,
    })
}

/// Walks `draws` paths `h` steps ahead, calling `visit(path_index, y, lambda_next)`
/// with the state after each path's last step.
fn walk_paths<R, V>(
    model: &ModelSpec,
    origin: &ForecastOrigin,
    steps: usize,
    draws: usize,
    rng: &mut R,
    kernel: &mut Kernel,
    mut visit: V,
) where
    R: Rng + ?Sized,
    V: FnMut(usize, u64, f64),
{
    let error = model.error();
    for i in 0..draws {
        let mut y = origin.y_last;
        let mut lambda = origin.lambda_next;
        for _ in 0..steps {
            let next = thin(y, logistic(lambda), rng) + error.sample_unchecked(rng);
            let score = if model.needs_score() { kernel.evaluate(next, y, lambda).score } else { 0.0 };
            lambda = model.step_lambda(lambda, next, score);
            y = next;
        }
        visit(i, y, lambda);
    }
}

fn check_inputs(model: &ModelSpec, h: usize, draws: usize) -> Result<()> {
    model.validate()?;
    if h == 0 {
        return Err(Error::Input("forecast horizon must be at least 1".into()));
    }
    if draws < MIN_DRAWS {
        return Err(Error::Input(alloc::format!("Monte Carlo forecasts need at least {MIN_DRAWS} draws, got {draws}")));
    }
    Ok(())
}

/// Monte Carlo pmf of `y_{T+h}` as empirical frequencies of `draws`
/// simulated paths.
pub fn forecast_mc<R: Rng + ?Sized>(
    model: &ModelSpec,
    origin: &ForecastOrigin,
    h: usize,
    draws: usize,
    rng: &mut R,
) -> Result<ForecastDistribution> {
    check_inputs(model, h, draws)?;
    let mut kernel = Kernel::new(model.error(), origin.y_last);
    let mut counts: Vec<u64> = Vec::new();
    let mut total: u64 = 0;
    walk_paths(model, origin, h, draws, rng, &mut kernel, |_, y, _| {
        if counts.len() <= y as usize {
            counts.resize(y as usize + 1, 0);
        }
        counts[y as usize] += 1;
        total += y;
    });
    let b = draws as f64;
    let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / b).collect();
    // Smallest x with at least half of the draws at or below it.
    let mut cum = 0u64;
    let mut median = 0u64;
    for (x, &c) in counts.iter().enumerate() {
        cum += c;
        if 2 * cum >= draws as u64 {
            median = x as u64;
            break;
        }
    }
    Ok(ForecastDistribution {
        horizon: h,
        pmf,
        point_mean: total as f64 / b,
        point_median: median,
        n_draws: draws,
        seed: None,
    })
}

/// Convenience wrapper with the GAS parameters and `α_{T+1}` given directly.
pub fn forecast_mc_gas<R: Rng + ?Sized>(
    params: &GasParams,
    y_last: u64,
    alpha_next: f64,
    h: usize,
    draws: usize,
    rng: &mut R,
) -> Result<ForecastDistribution> {
    forecast_mc(&ModelSpec::gas(*params), &ForecastOrigin::new(y_last, alpha_next), h, draws, rng)
}

/// Forecast pmfs for horizons `1..=h_max` from one origin. Horizon 1 is
/// exact; for `h ≥ 2` the pmf is the average over simulated paths of the
/// exact one-step pmf given each path's state at `T + h - 1`. Unlike raw
/// frequencies this estimate is positive on the whole support, so log
/// scores stay finite.
pub fn forecast_horizons<R: Rng + ?Sized>(
    model: &ModelSpec,
    origin: &ForecastOrigin,
    h_max: usize,
    draws: usize,
    rng: &mut R,
) -> Result<Vec<ForecastDistribution>> {
    check_inputs(model, h_max, draws)?;
    let mut kernel = Kernel::new(model.error(), origin.y_last);
    let mut out = Vec::with_capacity(h_max);
    out.push(forecast_from_pmf(kernel.predictive_pmf(origin.y_last, origin.lambda_next), 1, 0));
    // Paths are advanced one step per horizon and kept in lockstep.
    let error = model.error();
    let mut states: Vec<(u64, f64)> = vec![(origin.y_last, origin.lambda_next); draws];
    for h in 2..=h_max {
        let mut acc: Vec<f64> = Vec::new();
        let add = |acc: &mut Vec<f64>, pmf: &[f64], weight: f64| {
            if acc.len() < pmf.len() {
                acc.resize(pmf.len(), 0.0);
            }
            for (a, p) in acc.iter_mut().zip(pmf) {
                *a += weight * p;
            }
        };
        // Without score feedback the next α depends on y alone, so paths
        // sharing y share a one-step pmf.
        let mut by_y: Vec<(u64, f64)> = Vec::new();
        for state in states.iter_mut() {
            let (y, lambda) = *state;
            let next = thin(y, logistic(lambda), rng) + error.sample_unchecked(rng);
            let score = if model.needs_score() { kernel.evaluate(next, y, lambda).score } else { 0.0 };
            *state = (next, model.step_lambda(lambda, next, score));
            if model.needs_score() {
                add(&mut acc, &kernel.predictive_pmf(state.0, state.1), 1.0);
            } else {
                let i = next as usize;
                if by_y.len() <= i {
                    by_y.resize(i + 1, (0, 0.0));
                }
                by_y[i] = (by_y[i].0 + 1, state.1);
            }
        }
        for (y, &(count, lambda)) in by_y.iter().enumerate() {
            if count > 0 {
                add(&mut acc, &kernel.predictive_pmf(y as u64, lambda), count as f64);
            }
        }
        acc.iter_mut().for_each(|a| *a /= draws as f64);
        out.push(forecast_from_pmf(acc, h, draws));
    }
    Ok(out)
}

fn forecast_from_pmf(pmf: Vec<f64>, horizon: usize, n_draws: usize) -> ForecastDistribution {
    let mean = pmf.iter().enumerate().map(|(x, p)| x as f64 * p).sum();
    ForecastDistribution { horizon, point_median: median_of(&pmf), pmf, point_mean: mean, n_draws, seed: None }
}

/// `E(y_{T+h} | y_T) = α^h y_T + μ (1 - α^h) / (1 - α)` for the static INAR.
pub fn static_point_forecast(y_last: u64, alpha: f64, mean: f64, h: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain!("static point forecast needs alpha in [0, 1), got {alpha}"));
    }
    if h == 0 {
        return Err(Error::Input("forecast horizon must be at least 1".into()));
    }
    let ah = pow_int(alpha, h as i32);
    Ok(ah * y_last as f64 + mean * (1.0 - ah) / (1.0 - alpha))
}

/// Total-variation distance between two pmfs on the naturals.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| crate::math::fabs(p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_one_step_examples() {
        let spec = ErrorSpec::poisson(5.0);
        let f = forecast_exact_1(0, 0.3, &spec).unwrap();
        let pe = spec.pmf_vec().unwrap();
        assert_eq!(f.pmf.len(), pe.len());
        for (a, b) in f.pmf.iter().zip(&pe) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(forecast_exact_1(10, 0.5, &spec).unwrap().point_mean, 10.0);
        let f = forecast_exact_1(3, 0.4, &ErrorSpec::poisson(2.0)).unwrap();
        let want = 0.6f64.powi(3) * (-2.0f64).exp();
        assert!((f.pmf[0] - want).abs() < 1e-15);
        assert!((f.pmf[0] - 0.02924).abs() < 1e-5);
        assert!((f.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empirical_pmf_is_consistent() {
        let params = GasParams::new(-0.5, 0.9, 0.15, ErrorSpec::poisson(6.0));
        let f = forecast_mc_gas(&params, 12, 0.4, 3, 5000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!((f.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = f.pmf.iter().enumerate().map(|(x, p)| x as f64 * p).sum();
        assert!((mean - f.point_mean).abs() < 1e-12);
        assert!(f.prob(f.point_median) > 0.0);
        let g = forecast_mc_gas(&params, 12, 0.4, 3, 5000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_small_samples() {
        let params = GasParams::new(0.0, 0.5, 0.1, ErrorSpec::poisson(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(forecast_mc_gas(&params, 1, 0.5, 1, 999, &mut rng).is_err());
        assert!(forecast_mc_gas(&params, 1, 0.5, 0, 5000, &mut rng).is_err());
    }

    #[test]
    fn static_point_forecast_examples() {
        assert!((static_point_forecast(7, 0.3, 2.0, 1).unwrap() - (0.3 * 7.0 + 2.0)).abs() < 1e-15);
        for h in 1..8 {
            assert!((static_point_forecast(9, 0.0, 4.0, h).unwrap() - 4.0).abs() < 1e-15);
        }
        assert!((static_point_forecast(10, 0.5, 5.0, 3).unwrap() - 10.0).abs() < 1e-12);
        assert!(static_point_forecast(10, 1.0, 5.0, 3).is_err());
    }

    #[test]
    fn static_point_forecast_matches_monte_carlo() {
        let model = ModelSpec::gas(GasParams::new(0.0, 0.0, 0.0, ErrorSpec::poisson(5.0)));
        let origin = ForecastOrigin::new(10, 0.5);
        let f = forecast_mc(&model, &origin, 3, 1_000_000, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!((f.point_mean - 10.0).abs() < 0.05, "{}", f.point_mean);
    }

    #[test]
    fn horizon_pmfs_are_proper() {
        let model = ModelSpec::gas(GasParams::new(-0.3, 0.8, 0.2, ErrorSpec::negative_binomial(4.0, 9.0)));
        let origin = ForecastOrigin::new(9, 0.6);
        let fs = forecast_horizons(&model, &origin, 4, 2000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(fs.len(), 4);
        for (i, f) in fs.iter().enumerate() {
            assert_eq!(f.horizon, i + 1);
            assert!((f.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(f.pmf.iter().all(|&p| p > 0.0));
        }
        let exact = forecast_exact_1(9, 0.6, &model.error()).unwrap();
        assert!(total_variation(&fs[0].pmf, &exact.pmf) < 1e-12);
    }

    #[test]
    fn mixture_agrees_with_frequencies() {
        let model = ModelSpec::gas(GasParams::new(-0.5, 0.9, 0.15, ErrorSpec::poisson(6.0)));
        let origin = ForecastOrigin::new(15, 0.45);
        let mix = forecast_horizons(&model, &origin, 3, 20_000, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let freq = forecast_mc(&model, &origin, 3, 100_000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(total_variation(&mix[2].pmf, &freq.pmf) < 0.02);
    }
}
