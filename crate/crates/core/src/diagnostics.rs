//! Filter stability checks, filter-quality metrics under a known DGP,
//! approximate confidence bands for the filtered survival path, and the
//! expanding-window forecast evaluation.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::ErrorSpec;
use crate::error::{Error, Result};
use crate::estimation::{self, FitOptions, FitResult};
use crate::filter::GasParams;
use crate::forecasting::{forecast_horizons, ForecastDistribution, ForecastOrigin};
use crate::linalg;
use crate::math::{fabs, log, log_alpha_pair, logistic, LOGIT_BOUND};
use crate::models::{ModelKind, ModelSpec};
use crate::score::Kernel;
use crate::series::CountSeries;
use crate::simulation::{DgpKind, SimulatedSeries};

/// Smallest α-grid accepted by [`contraction_check`].
pub const MIN_GRID: usize = 101;
pub const DEFAULT_GRID: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// Sample mean of `log max(|β - τ y_{t-1}/4|, |β + τ m_t²|)`.
    pub sufficient_value: f64,
    /// Sample mean of `log sup_α |β + τ ṡ_t(α)|`, sup over the logit grid.
    pub empirical_value: f64,
    pub satisfied_sufficient: bool,
    pub satisfied_empirical: bool,
    pub grid_size: usize,
}

/// Sample averages of the contraction quantities. A value of `-inf`
/// (β = τ = 0) counts as satisfied.
pub fn contraction_check(series: &CountSeries, params: &GasParams, grid_size: usize) -> Result<ContractionReport> {
    params.validate()?;
    if series.len() < 2 {
        return Err(Error::Input("contraction check needs at least 2 observations".into()));
    }
    if grid_size < MIN_GRID {
        return Err(Error::Input(alloc::format!("grid needs at least {MIN_GRID} points, got {grid_size}")));
    }
    let (beta, tau) = (params.beta, params.tau);
    let grid: Vec<(f64, f64)> = (0..grid_size)
        .map(|i| -LOGIT_BOUND + 2.0 * LOGIT_BOUND * i as f64 / (grid_size - 1) as f64)
        .map(log_alpha_pair)
        .collect();
    let mut kernel = Kernel::new(params.error, series.max());
    let mut sufficient = 0.0;
    let mut empirical = 0.0;
    let n = series.n_transitions() as f64;
    for w in series.windows(2) {
        let (y_prev, y) = (w[0], w[1]);
        let m = y.min(y_prev) as f64;
        let lower = fabs(beta - tau * y_prev as f64 / 4.0);
        let upper = fabs(beta + tau * m * m);
        sufficient += log(lower.max(upper));
        let sup = if tau == 0.0 || y_prev == 0 {
            fabs(beta)
        } else {
            grid.iter()
                .map(|&(la, lb)| fabs(beta + tau * kernel.evaluate_logs(y, y_prev, la, lb).score_derivative))
                .fold(0.0, f64::max)
        };
        empirical += log(sup);
    }
    let sufficient_value = sufficient / n;
    let empirical_value = empirical / n;
    Ok(ContractionReport {
        sufficient_value,
        empirical_value,
        satisfied_sufficient: sufficient_value < 0.0,
        satisfied_empirical: empirical_value < 0.0,
        grid_size,
    })
}

/// `Σ_x p(x | y_prev, α, ξ) s(x, y_prev, α, ξ)` over the truncated support;
/// zero up to truncation and rounding.
pub fn score_zero_mean(y_prev: u64, alpha: f64, spec: &ErrorSpec) -> Result<f64> {
    let pmf = crate::score::predictive_pmf(y_prev, alpha, spec)?;
    let mut kernel = Kernel::new(*spec, pmf.len() as u64 + y_prev);
    let lambda = crate::math::logit(alpha);
    Ok(pmf.iter().enumerate().map(|(y, p)| p * kernel.evaluate(y as u64, y_prev, lambda).score).sum())
}

/// `Σ_x p_true(x) log(p_true(x) / p_model(x))` over a common truncated
/// support.
pub fn kl_conditional(p_true: &[f64], p_model: &[f64]) -> Result<f64> {
    let mut kl = 0.0;
    for (x, &p) in p_true.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let q = p_model.get(x).copied().unwrap_or(0.0);
        if !(q > 0.0) {
            return Err(Error::Input(alloc::format!("model pmf has no mass at {x} where the reference pmf has {p}")));
        }
        kl += p * (log(p) - log(q));
    }
    Ok(kl.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterQuality {
    /// Time-average of `(α̂_t - α_t^o)²`.
    pub mse_alpha: f64,
    /// Time-average KL divergence from the true conditional pmf to the
    /// model's.
    pub mean_kl: f64,
}

/// Compares a fitted model's survival path and conditional pmfs with the
/// DGP that generated `sim`.
pub fn filter_quality(dgp: DgpKind, fitted: &ModelSpec, sim: &SimulatedSeries) -> Result<FilterQuality> {
    let series = &sim.series;
    if sim.true_alpha.len() != series.len() {
        return Err(Error::Input(alloc::format!(
            "true alpha path has length {}, series has {}",
            sim.true_alpha.len(),
            series.len()
        )));
    }
    let path = fitted.path(series)?;
    let mut truth = Kernel::new(dgp.error(), series.max());
    let mut model = Kernel::new(fitted.error(), series.max());
    let mut sq = 0.0;
    let mut kl = 0.0;
    for (t, &lambda) in path.lambda.iter().enumerate() {
        let y_prev = series[t];
        let true_alpha = sim.true_alpha[t + 1];
        let d = logistic(lambda) - true_alpha;
        sq += d * d;

        let (ta, tb) = (log(true_alpha), libm::log1p(-true_alpha));
        let true_pmf = truth.predictive_pmf_logs(y_prev, ta, tb);
        let (ma, mb) = log_alpha_pair(lambda);
        let mut kl_t = 0.0;
        for (x, &p) in true_pmf.iter().enumerate() {
            if p > 0.0 {
                kl_t += p * (log(p) - model.log_predictive_logs(x as u64, y_prev, ma, mb));
            }
        }
        kl += kl_t.max(0.0);
    }
    let n = path.lambda.len() as f64;
    Ok(FilterQuality { mse_alpha: sq / n, mean_kl: kl / n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub level: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Pointwise quantile bands for the filtered survival probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBands {
    /// Filtered `α̂_t`, `t = 1..=T`, at the point estimate.
    pub alpha_hat: Vec<f64>,
    pub bands: Vec<Band>,
    pub n_draws: usize,
    /// The bands rest on a normal approximation to the estimator.
    pub approximate: bool,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Draws parameter vectors from a normal approximation to the estimator
/// (in the unconstrained coordinates), re-runs the filter for each and
/// reports pointwise quantile bands at each requested coverage `level`.
pub fn alpha_confidence_bands<R: Rng + ?Sized>(
    series: &CountSeries,
    fit: &FitResult,
    levels: &[f64],
    n_draws: usize,
    rng: &mut R,
) -> Result<AlphaBands> {
    let cov = fit.covariance.as_ref().ok_or_else(|| {
        Error::CovarianceUnavailable("no covariance at the estimate; try more data or more optimizer restarts".into())
    })?;
    if n_draws < 2 {
        return Err(Error::Input("confidence bands need at least 2 draws".into()));
    }
    if levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(Error::Input("band levels must lie in (0, 1)".into()));
    }
    let factor = linalg::psd_factor(cov, 1e-14)
        .ok_or_else(|| Error::CovarianceUnavailable("covariance is not positive semidefinite".into()))?;
    let kind = fit.kind();
    let center = estimation::to_unconstrained(&fit.model);
    let alpha_hat = fit.model.alpha_path(series)?;
    let n_t = alpha_hat.len();

    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(n_draws);
    while draws.len() < n_draws {
        let z: Vec<f64> = (0..center.len()).map(|_| StandardNormal.sample(rng)).collect();
        let shift = linalg::mat_vec(&factor, &z);
        let v: Vec<f64> = center.iter().zip(&shift).map(|(c, s)| c + s).collect();
        let model = estimation::from_unconstrained(kind, &v)?;
        if model.validate().is_err() {
            continue;
        }
        draws.push(model.alpha_path(series)?);
    }

    let mut bands: Vec<Band> = levels
        .iter()
        .map(|&level| Band { level, lower: Vec::with_capacity(n_t), upper: Vec::with_capacity(n_t) })
        .collect();
    let mut column = Vec::with_capacity(n_draws);
    for t in 0..n_t {
        column.clear();
        column.extend(draws.iter().map(|d| d[t]));
        column.sort_by(f64::total_cmp);
        for band in bands.iter_mut() {
            band.lower.push(quantile_sorted(&column, (1.0 - band.level) / 2.0));
            band.upper.push(quantile_sorted(&column, (1.0 + band.level) / 2.0));
        }
    }
    Ok(AlphaBands { alpha_hat, bands, n_draws, approximate: true })
}

/// Running sums of squared point-forecast errors and log scores per horizon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreAccumulator {
    sq_err: Vec<f64>,
    log_score: Vec<f64>,
    count: Vec<usize>,
}

impl ScoreAccumulator {
    pub fn new(h_max: usize) -> Self {
        ScoreAccumulator {
            sq_err: alloc::vec![0.0; h_max],
            log_score: alloc::vec![0.0; h_max],
            count: alloc::vec![0; h_max],
        }
    }

    /// Records the forecast for horizon `forecast.horizon` against `realized`.
    pub fn add(&mut self, forecast: &ForecastDistribution, realized: u64) {
        let i = forecast.horizon - 1;
        let e = forecast.point_mean - realized as f64;
        self.sq_err[i] += e * e;
        self.log_score[i] += log(forecast.prob(realized));
        self.count[i] += 1;
    }

    pub fn mse(&self) -> Vec<f64> {
        self.sq_err.iter().zip(&self.count).map(|(s, &c)| s / c as f64).collect()
    }

    pub fn mean_log_score(&self) -> Vec<f64> {
        self.log_score.iter().zip(&self.count).map(|(s, &c)| s / c as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    /// Size of the first training sample.
    pub split: usize,
    pub h_max: usize,
    /// Monte Carlo paths per forecast for `h ≥ 2`.
    pub draws: usize,
    pub fit: FitOptions,
}

/// Shortest first training sample accepted by [`rolling_evaluate`].
pub const MIN_SPLIT: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kind: ModelKind,
    pub horizons: Vec<usize>,
    pub mse: Vec<f64>,
    /// Mean `log p̂(y_realized)` per horizon.
    pub log_score: Vec<f64>,
    pub n_origins: usize,
    /// Origins dropped because the fit failed.
    pub skipped: usize,
}

/// Expanding-window evaluation: at every origin `o = split..=len - h_max`
/// each model is refit on `y_0..y_{o-1}` (seeded with its previous
/// estimate) and forecasts `y_{o-1+h}` for `h = 1..=h_max`.
pub fn rolling_evaluate<R: Rng + ?Sized>(
    series: &CountSeries,
    kinds: &[ModelKind],
    config: &RollingConfig,
    rng: &mut R,
) -> Result<Vec<EvalReport>> {
    let (split, h_max) = (config.split, config.h_max);
    if split < MIN_SPLIT {
        return Err(Error::Input(alloc::format!("split must be at least {MIN_SPLIT}, got {split}")));
    }
    if h_max == 0 || split + h_max > series.len() {
        return Err(Error::Input(alloc::format!(
            "split + h_max ({}) exceeds the series length {}",
            split + h_max,
            series.len()
        )));
    }
    let mut reports = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut acc = ScoreAccumulator::new(h_max);
        let mut previous: Option<ModelSpec> = None;
        let mut n_origins = 0;
        let mut skipped = 0;
        for origin in split..=series.len() - h_max {
            let training = series.head(origin);
            let starts: Vec<ModelSpec> = previous.into_iter().collect();
            let forecasts = estimation::fit_with_starts(kind, &training, &config.fit, &starts).and_then(|f| {
                previous = Some(f.model);
                let state = ForecastOrigin::from_series(&f.model, &training)?;
                forecast_horizons(&f.model, &state, h_max, config.draws, rng)
            });
            match forecasts {
                Ok(fs) => {
                    for f in &fs {
                        acc.add(f, series[origin - 1 + f.horizon]);
                    }
                    n_origins += 1;
                }
                Err(_) => skipped += 1,
            }
        }
        reports.push(EvalReport {
            kind,
            horizons: (1..=h_max).collect(),
            mse: acc.mse(),
            log_score: acc.mean_log_score(),
            n_origins,
            skipped,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::logit;
    use crate::simulation::{simulate_dgp, simulate_model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gas(beta: f64, tau: f64) -> GasParams {
        GasParams::with_mean_logit(-0.5, beta, tau, ErrorSpec::poisson(6.0))
    }

    #[test]
    fn contraction_without_score_feedback() {
        let s = CountSeries::new(alloc::vec![3, 7, 2, 0, 9, 4]);
        let r = contraction_check(&s, &gas(0.5, 0.0), 101).unwrap();
        assert!((r.sufficient_value - 0.5f64.ln()).abs() < 1e-15);
        assert!((r.empirical_value - 0.5f64.ln()).abs() < 1e-15);
        assert!(r.satisfied_sufficient && r.satisfied_empirical);

        let r = contraction_check(&s, &gas(0.0, 0.0), 101).unwrap();
        assert_eq!(r.sufficient_value, f64::NEG_INFINITY);
        assert!(r.satisfied_sufficient && r.satisfied_empirical);
        assert!(contraction_check(&s, &gas(0.5, 0.1), 100).is_err());
    }

    #[test]
    fn sufficient_condition_dominates_grid_sup() {
        let params = gas(0.9, 0.15);
        for seed in 0..5 {
            let sim = simulate_model(&ModelSpec::gas(params), 1000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for p in [params, gas(0.6, 0.05), gas(0.95, -0.1)] {
                let r = contraction_check(&sim.series, &p, DEFAULT_GRID).unwrap();
                assert!(r.empirical_value <= r.sufficient_value + 1e-9);
                if r.satisfied_sufficient {
                    assert!(r.satisfied_empirical);
                }
            }
        }
    }

    #[test]
    fn kl_examples() {
        let p = ErrorSpec::poisson(5.0).pmf_vec().unwrap();
        assert_eq!(kl_conditional(&p, &p).unwrap(), 0.0);
        let q: Vec<f64> = (0..p.len() as u64).map(|x| ErrorSpec::poisson(6.0).pmf(x).unwrap()).collect();
        let closed = 5.0 * (5.0f64 / 6.0).ln() + 1.0;
        let kl = kl_conditional(&p, &q).unwrap();
        assert!((kl - closed).abs() < 1e-10, "{kl} {closed}");
        assert!((kl - 0.08839).abs() < 1e-5);
        assert!(kl_conditional(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn kl_is_non_negative(raw in proptest::collection::vec((0.001f64..1.0, 0.001f64..1.0), 1..30)) {
            let sp: f64 = raw.iter().map(|r| r.0).sum();
            let sq: f64 = raw.iter().map(|r| r.1).sum();
            let p: Vec<f64> = raw.iter().map(|r| r.0 / sp).collect();
            let q: Vec<f64> = raw.iter().map(|r| r.1 / sq).collect();
            proptest::prop_assert!(kl_conditional(&p, &q).unwrap() >= 0.0);
        }
    }

    #[test]
    fn score_zero_mean_on_grid() {
        for spec in [ErrorSpec::poisson(5.0), ErrorSpec::negative_binomial(2.0, 7.0)] {
            for y_prev in [0, 4, 25] {
                for a in [0.1, 0.5, 0.9] {
                    assert!(score_zero_mean(y_prev, a, &spec).unwrap().abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn oracle_model_has_zero_filter_error() {
        // The rc-INAR with τ = 0 reproduces a constant α exactly.
        let kind = DgpKind::FastSine;
        let mut sim = simulate_dgp(kind, 300, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        sim.true_alpha.iter_mut().for_each(|a| *a = 0.6);
        let oracle = ModelSpec::Rc { omega: logit(0.6), tau: 0.0, error: ErrorSpec::poisson(5.0) };
        let q = filter_quality(kind, &oracle, &sim).unwrap();
        assert!(q.mse_alpha < 1e-28);
        assert!(q.mean_kl.abs() < 1e-12);

        sim.true_alpha.pop();
        assert!(filter_quality(kind, &oracle, &sim).is_err());
    }

    #[test]
    fn degenerate_covariance_collapses_bands() {
        let s = simulate_model(&ModelSpec::gas(gas(0.9, 0.15)), 200, &mut ChaCha8Rng::seed_from_u64(2)).unwrap().series;
        let model = ModelSpec::gas(gas(0.9, 0.15));
        let ll = model.log_likelihood(&s).unwrap();
        let fit = FitResult {
            model,
            loglik_sum: ll.sum,
            loglik_avg: ll.avg,
            aic: 0.0,
            n_params: 4,
            n_obs: ll.n,
            std_errors: Some(alloc::vec![0.0; 4]),
            covariance: Some(linalg::zeros(4)),
            converged: true,
            trace: estimation::OptimizerTrace {
                iterations: 0,
                evaluations: 0,
                restarts: 0,
                best_objective: ll.avg,
                best_start: 0,
            },
        };
        let bands = alpha_confidence_bands(&s, &fit, &[0.8, 0.95], 50, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for b in &bands.bands {
            for t in 0..bands.alpha_hat.len() {
                assert!((b.lower[t] - bands.alpha_hat[t]).abs() < 1e-12);
                assert!((b.upper[t] - bands.alpha_hat[t]).abs() < 1e-12);
            }
        }
        let mut no_cov = fit.clone();
        no_cov.covariance = None;
        assert!(matches!(
            alpha_confidence_bands(&s, &no_cov, &[0.95], 50, &mut ChaCha8Rng::seed_from_u64(1)),
            Err(Error::CovarianceUnavailable(_))
        ));
    }

    #[test]
    fn bands_are_nested() {
        let truth = ModelSpec::gas(gas(0.9, 0.15));
        let s = simulate_model(&truth, 400, &mut ChaCha8Rng::seed_from_u64(3)).unwrap().series;
        let fit = estimation::fit(truth.kind(), &s, &FitOptions::default()).unwrap();
        let b = alpha_confidence_bands(&s, &fit, &[0.8, 0.95], 200, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let (b80, b95) = (&b.bands[0], &b.bands[1]);
        for t in 0..b.alpha_hat.len() {
            assert!(b95.lower[t] <= b80.lower[t] + 1e-15);
            assert!(b80.upper[t] <= b95.upper[t] + 1e-15);
        }
    }

    #[test]
    fn perfect_foresight_scores() {
        let mut acc = ScoreAccumulator::new(2);
        for (h, y) in [(1usize, 4u64), (2, 7), (1, 0)] {
            let mut pmf = alloc::vec![0.0; y as usize + 1];
            pmf[y as usize] = 1.0;
            let f =
                ForecastDistribution { horizon: h, pmf, point_mean: y as f64, point_median: y, n_draws: 0, seed: None };
            acc.add(&f, y);
        }
        assert_eq!(acc.mse(), alloc::vec![0.0, 0.0]);
        assert_eq!(acc.mean_log_score(), alloc::vec![0.0, 0.0]);
    }

    #[test]
    fn rolling_evaluation_shapes() {
        let truth = ModelSpec::gas(gas(0.9, 0.15));
        let s = simulate_model(&truth, 60, &mut ChaCha8Rng::seed_from_u64(5)).unwrap().series;
        let kinds = ["gas-poisson".parse().unwrap(), "inar-poisson".parse().unwrap()];
        let config =
            RollingConfig { split: 50, h_max: 3, draws: 1000, fit: FitOptions { restarts: 1, ..Default::default() } };
        let reports = rolling_evaluate(&s, &kinds, &config, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert_eq!(r.n_origins + r.skipped, 8);
            assert_eq!(r.mse.len(), 3);
            assert!(r.log_score.iter().all(|v| v.is_finite() && *v < 0.0));
        }
        let bad = RollingConfig { split: 20, ..config };
        assert!(rolling_evaluate(&s, &kinds, &bad, &mut ChaCha8Rng::seed_from_u64(6)).is_err());
        let too_long = RollingConfig { split: 58, ..config };
        assert!(rolling_evaluate(&s, &kinds, &too_long, &mut ChaCha8Rng::seed_from_u64(6)).is_err());
    }
}
