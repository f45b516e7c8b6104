//! Maximum-likelihood estimation for every [`ModelKind`], with numerical
//! Hessian standard errors, AIC and the likelihood-ratio test.
//!
//! Optimization runs in an unconstrained coordinate system:
//!
//! | natural            | unconstrained          |
//! |--------------------|------------------------|
//! | ω, τ               | identity               |
//! | β ∈ (-1, 1)        | `atanh β`              |
//! | static α ∈ (0, 1)  | `logit α`              |
//! | μ > 0              | `log μ`                |
//! | σ² > μ             | `log(σ² - μ)`          |

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::distributions::ErrorSpec;
use crate::error::{Error, Result};
use crate::filter::GasParams;
use crate::linalg::{self, Matrix};
use crate::math::{chi_square_sf, exp, fabs, log, logistic, logit, sqrt};
use crate::models::{Dynamics, ErrorFamily, ModelKind, ModelSpec};
use crate::optimize::nelder_mead;
use crate::score::Kernel;
use crate::series::CountSeries;

/// Shortest series accepted by [`fit`].
pub const MIN_FIT_LEN: usize = 10;

pub fn to_unconstrained(model: &ModelSpec) -> Vec<f64> {
    let mut v = match *model {
        ModelSpec::Gas { params } => vec![params.omega, libm::atanh(params.beta), params.tau],
        ModelSpec::Static { alpha, .. } => vec![logit(alpha)],
        ModelSpec::Rc { omega, tau, .. } => vec![omega, tau],
    };
    match model.error() {
        ErrorSpec::Poisson { mean } => v.push(log(mean)),
        ErrorSpec::NegativeBinomial { mean, variance } => {
            v.push(log(mean));
            v.push(log(variance - mean));
        }
    }
    v
}

pub fn from_unconstrained(kind: ModelKind, v: &[f64]) -> Result<ModelSpec> {
    if v.len() != kind.n_params() {
        return Err(Error::Arity { expected: kind.n_params(), got: v.len() });
    }
    let k = dynamic_len(kind.dynamics);
    let mean = exp(v[k]);
    let error = match kind.family {
        ErrorFamily::Poisson => ErrorSpec::poisson(mean),
        ErrorFamily::NegativeBinomial => ErrorSpec::negative_binomial(mean, mean + exp(v[k + 1])),
    };
    Ok(match kind.dynamics {
        Dynamics::Gas => ModelSpec::Gas { params: GasParams::new(v[0], libm::tanh(v[1]), v[2], error) },
        Dynamics::Static => ModelSpec::Static { alpha: logistic(v[0]), error },
        Dynamics::Rc => ModelSpec::Rc { omega: v[0], tau: v[1], error },
    })
}

fn dynamic_len(d: Dynamics) -> usize {
    match d {
        Dynamics::Gas => 3,
        Dynamics::Static => 1,
        Dynamics::Rc => 2,
    }
}

/// Jacobian `∂ natural / ∂ unconstrained` at `v`.
pub fn natural_jacobian(kind: ModelKind, v: &[f64]) -> Result<Matrix> {
    let model = from_unconstrained(kind, v)?;
    let n = v.len();
    let mut j = linalg::identity(n);
    match model {
        ModelSpec::Gas { params } => j[1][1] = 1.0 - params.beta * params.beta,
        ModelSpec::Static { alpha, .. } => j[0][0] = alpha * (1.0 - alpha),
        ModelSpec::Rc { .. } => {}
    }
    let k = dynamic_len(kind.dynamics);
    let error = model.error();
    j[k][k] = error.mean();
    if kind.family == ErrorFamily::NegativeBinomial {
        j[k + 1][k] = error.mean();
        j[k + 1][k + 1] = error.variance() - error.mean();
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { restarts: 5, max_iter: 2000, tol: 1e-9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    /// Best value of the maximized objective (average log-likelihood).
    pub best_objective: f64,
    /// Index of the start that produced the estimate.
    pub best_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelSpec,
    pub loglik_sum: f64,
    pub loglik_avg: f64,
    pub aic: f64,
    pub n_params: usize,
    /// Number of likelihood contributions `T`.
    pub n_obs: usize,
    /// Natural-parameter standard errors; `None` when the Hessian is not
    /// negative definite at the estimate.
    pub std_errors: Option<Vec<f64>>,
    /// Covariance of the unconstrained parameters (inverse observed
    /// information).
    pub covariance: Option<Matrix>,
    pub converged: bool,
    pub trace: OptimizerTrace,
}

impl FitResult {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }
}

pub fn aic(loglik_sum: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik_sum
}

/// Objective evaluator reusing one kernel across parameter values.
struct Objective<'a> {
    kind: ModelKind,
    series: &'a CountSeries,
    kernel: Kernel,
}

impl<'a> Objective<'a> {
    fn new(kind: ModelKind, series: &'a CountSeries) -> Self {
        Objective { kind, series, kernel: Kernel::new(ErrorSpec::poisson(1.0), series.max()) }
    }

    /// Summed log-likelihood at unconstrained `v`; `-inf` outside the domain.
    fn loglik_sum(&mut self, v: &[f64]) -> f64 {
        if v.iter().any(|x| !x.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let model = match from_unconstrained(self.kind, v) {
            Ok(m) => m,
            Err(_) => return f64::NEG_INFINITY,
        };
        if model.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        self.kernel.set_spec(model.error());
        let ll = model.loglik_sum_with(&mut self.kernel, self.series);
        if ll.is_nan() {
            f64::NEG_INFINITY
        } else {
            ll
        }
    }
}

/// Moment-based starting point in natural parameters.
pub fn initial_model(kind: ModelKind, series: &CountSeries) -> ModelSpec {
    let alpha = series.lag1_autocorrelation().clamp(0.05, 0.95);
    let mean_y = series.mean();
    let var_y = series.variance();
    let mu = (mean_y * (1.0 - alpha)).max(0.1);
    // Var(y) = α² Var(y) + α(1-α) E y + σ²_ε for a stationary INAR(1).
    let sigma2 = ((1.0 - alpha * alpha) * var_y - alpha * (1.0 - alpha) * mean_y).max(1.05 * mu + 0.05);
    let error = match kind.family {
        ErrorFamily::Poisson => ErrorSpec::poisson(mu),
        ErrorFamily::NegativeBinomial => ErrorSpec::negative_binomial(mu, sigma2),
    };
    match kind.dynamics {
        Dynamics::Gas => {
            let beta = 0.9;
            ModelSpec::Gas { params: GasParams::new(logit(alpha) * (1.0 - beta), beta, 0.05, error) }
        }
        Dynamics::Static => ModelSpec::Static { alpha, error },
        Dynamics::Rc => ModelSpec::Rc { omega: logit(alpha), tau: 0.0, error },
    }
}

/// Initial simplex step and restart jitter scale per unconstrained coordinate.
fn scales(kind: ModelKind) -> (Vec<f64>, Vec<f64>) {
    let (mut step, mut jitter) = match kind.dynamics {
        Dynamics::Gas => (vec![0.2, 0.3, 0.05], vec![0.3, 0.3, 0.05]),
        Dynamics::Static => (vec![0.3], vec![0.5]),
        Dynamics::Rc => (vec![0.2, 0.02], vec![0.3, 0.02]),
    };
    step.push(0.1);
    jitter.push(0.2);
    if kind.family == ErrorFamily::NegativeBinomial {
        step.push(0.3);
        jitter.push(0.3);
    }
    (step, jitter)
}

fn check_fit_input(kind: ModelKind, series: &CountSeries) -> Result<()> {
    if series.len() < MIN_FIT_LEN {
        return Err(Error::Input(alloc::format!(
            "fitting needs at least {MIN_FIT_LEN} observations, got {}",
            series.len()
        )));
    }
    if kind.dynamics != Dynamics::Static && series.is_constant() {
        return Err(Error::NoSurvivalInformation(
            "series is constant, the survival dynamics are not identified".to_string(),
        ));
    }
    Ok(())
}

/// Maximum-likelihood fit with multistart Nelder–Mead.
pub fn fit(kind: ModelKind, series: &CountSeries, options: &FitOptions) -> Result<FitResult> {
    fit_with_starts(kind, series, options, &[])
}

/// As [`fit`], with additional starting models placed ahead of the
/// moment-based starts (for example the previous estimate in a rolling
/// evaluation).
pub fn fit_with_starts(
    kind: ModelKind,
    series: &CountSeries,
    options: &FitOptions,
    extra_starts: &[ModelSpec],
) -> Result<FitResult> {
    check_fit_input(kind, series)?;
    if options.restarts == 0 || options.max_iter == 0 || !(options.tol > 0.0) {
        return Err(Error::Input("restarts, max_iter and tol must be positive".to_string()));
    }
    let mut objective = Objective::new(kind, series);
    let n_obs = series.n_transitions() as f64;
    let (step, jitter) = scales(kind);

    let base = to_unconstrained(&initial_model(kind, series));
    let mut starts: Vec<Vec<f64>> = extra_starts
        .iter()
        .filter(|m| m.kind() == kind)
        .map(to_unconstrained)
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .collect();
    for r in 0..options.restarts {
        if r == 0 {
            starts.push(base.clone());
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(r as u64));
            starts.push(
                base.iter()
                    .zip(&jitter)
                    .map(|(b, s)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        b + s * z
                    })
                    .collect(),
            );
        }
    }

    let mut best: Option<(Vec<f64>, f64, bool, usize)> = None;
    let mut iterations = 0;
    let mut evaluations = 0;
    for (i, start) in starts.iter().enumerate() {
        let mut x = start.clone();
        let mut f = f64::INFINITY;
        let mut converged = false;
        // Re-launch from the last optimum until a fresh simplex stops improving.
        for round in 0..4 {
            let scale = if round == 0 { 1.0 } else { 0.5 };
            let run_step: Vec<f64> = step.iter().map(|s| s * scale).collect();
            let m = nelder_mead(|v| -objective.loglik_sum(v) / n_obs, &x, &run_step, options.max_iter, options.tol);
            iterations += m.iterations;
            evaluations += m.evaluations;
            let improvement = f - m.f;
            if m.f <= f {
                x = m.x;
                f = m.f;
            }
            converged = m.converged;
            if !(improvement > options.tol) || !converged {
                break;
            }
        }
        if f.is_finite() && best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((x, f, converged, i));
        }
    }
    let (v_hat, f_hat, converged, best_start) =
        best.ok_or_else(|| Error::Input("likelihood is not finite at any starting point".to_string()))?;

    let model = from_unconstrained(kind, &v_hat)?;
    let v_hat = to_unconstrained(&model);
    let loglik_sum = objective.loglik_sum(&v_hat);
    let covariance = unconstrained_covariance(|v| objective.loglik_sum(v), &v_hat);
    let std_errors = match &covariance {
        Some(cov) => Some(delta_std_errors(kind, &v_hat, cov)?),
        None => None,
    };
    let n_params = kind.n_params();
    Ok(FitResult {
        model,
        loglik_sum,
        loglik_avg: loglik_sum / n_obs,
        aic: aic(loglik_sum, n_params),
        n_params,
        n_obs: series.n_transitions(),
        std_errors,
        covariance,
        converged,
        trace: OptimizerTrace { iterations, evaluations, restarts: starts.len(), best_objective: -f_hat, best_start },
    })
}

/// Central-difference Hessian with steps `1e-4 · (1 + |x_i|)`.
pub fn numerical_hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Matrix {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|xi| 1e-4 * (1.0 + fabs(*xi))).collect();
    let mut hess = linalg::zeros(n);
    let mut p = x.to_vec();
    let f0 = f(x);
    for i in 0..n {
        p[i] = x[i] + h[i];
        let fp = f(&p);
        p[i] = x[i] - h[i];
        let fm = f(&p);
        p[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64, p: &mut Vec<f64>| {
                p[i] = x[i] + si * h[i];
                p[j] = x[j] + sj * h[j];
                let v = f(p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0, &mut p) - corner(1.0, -1.0, &mut p) - corner(-1.0, 1.0, &mut p)
                + corner(-1.0, -1.0, &mut p))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Inverse of the negative Hessian of a log-likelihood at its maximum;
/// `None` if that matrix is not positive definite.
pub fn unconstrained_covariance<F: FnMut(&[f64]) -> f64>(loglik: F, x: &[f64]) -> Option<Matrix> {
    let hess = numerical_hessian(loglik, x);
    if hess.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let info: Matrix = hess.iter().map(|row| row.iter().map(|v| -v).collect()).collect();
    linalg::spd_inverse(&info)
}

fn delta_std_errors(kind: ModelKind, v: &[f64], cov: &Matrix) -> Result<Vec<f64>> {
    let j = natural_jacobian(kind, v)?;
    let natural = linalg::sandwich(&j, cov);
    Ok((0..v.len()).map(|i| sqrt(natural[i][i].max(0.0))).collect())
}

/// Standard errors of the natural parameters at the fitted model,
/// recomputed from `series`.
pub fn std_errors(fit: &FitResult, series: &CountSeries) -> Result<Vec<f64>> {
    let kind = fit.kind();
    let v = to_unconstrained(&fit.model);
    let mut objective = Objective::new(kind, series);
    let cov = unconstrained_covariance(|x| objective.loglik_sum(x), &v)
        .ok_or_else(|| Error::CovarianceUnavailable("Hessian is not negative definite at the estimate".to_string()))?;
    delta_std_errors(kind, &v, &cov)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: u32,
    pub pvalue: f64,
}

/// Likelihood-ratio test from summed log-likelihoods.
pub fn lr_from_logliks(restricted: f64, full: f64, df: u32) -> LrTest {
    let statistic = (2.0 * (full - restricted)).max(0.0);
    LrTest { statistic, df, pvalue: chi_square_sf(statistic, df) }
}

/// Degrees of freedom when `restricted` is nested in `full`.
pub fn nesting_df(restricted: ModelKind, full: ModelKind) -> Option<u32> {
    if restricted.family != full.family || restricted.dynamics != Dynamics::Static {
        return None;
    }
    match full.dynamics {
        Dynamics::Gas => Some(2),
        Dynamics::Rc => Some(1),
        Dynamics::Static => None,
    }
}

pub fn lr_test(restricted: &FitResult, full: &FitResult) -> Result<LrTest> {
    if restricted.kind() == full.kind() {
        return Ok(lr_from_logliks(restricted.loglik_sum, full.loglik_sum, 0));
    }
    let df = nesting_df(restricted.kind(), full.kind())
        .ok_or_else(|| Error::NotNested(alloc::format!("{} is not nested in {}", restricted.kind(), full.kind())))?;
    Ok(lr_from_logliks(restricted.loglik_sum, full.loglik_sum, df))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::simulate_model;

    fn kind(s: &str) -> ModelKind {
        s.parse().unwrap()
    }

    #[test]
    fn transform_examples() {
        let m = ModelSpec::gas(GasParams::new(0.3, 0.0, 0.1, ErrorSpec::poisson(2.0)));
        assert_eq!(to_unconstrained(&m)[1], 0.0);
        let m = ModelSpec::gas(GasParams::new(0.3, 0.9, 0.1, ErrorSpec::negative_binomial(6.0, 15.0)));
        let v = to_unconstrained(&m);
        assert!((v[1] - 1.4722).abs() < 1e-4);
        assert!((v[3] - 6f64.ln()).abs() < 1e-15 && (v[4] - 9f64.ln()).abs() < 1e-15);
        let back = from_unconstrained(m.kind(), &v).unwrap();
        let (a, b) = (m.natural_params(), back.natural_params());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(matches!(from_unconstrained(m.kind(), &v[..3]), Err(Error::Arity { .. })));
    }

    proptest::proptest! {
        #[test]
        fn transforms_round_trip(omega in -3.0f64..3.0, beta in -0.99f64..0.99, tau in -1.0f64..1.0,
                                 alpha in 0.01f64..0.99, mean in 0.1f64..50.0, extra in 0.01f64..50.0) {
            let errors = [ErrorSpec::poisson(mean), ErrorSpec::negative_binomial(mean, mean + extra)];
            for error in errors {
                for m in [
                    ModelSpec::gas(GasParams::new(omega, beta, tau, error)),
                    ModelSpec::Static { alpha, error },
                    ModelSpec::Rc { omega, tau, error },
                ] {
                    let back = from_unconstrained(m.kind(), &to_unconstrained(&m)).unwrap();
                    for (x, y) in m.natural_params().iter().zip(back.natural_params()) {
                        proptest::prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_objective_has_unit_std_errors() {
        let cov = unconstrained_covariance(|v| -v.iter().map(|x| x * x).sum::<f64>() / 2.0, &[0.0; 4]).unwrap();
        for i in 0..4 {
            assert!((cov[i][i].sqrt() - 1.0).abs() < 1e-6);
        }
        assert!(unconstrained_covariance(|v| v[0] * v[0], &[0.0]).is_none());
    }

    #[test]
    fn lr_examples() {
        let t = lr_from_logliks(-669.03, -662.91, 2);
        assert!((t.statistic - 12.24).abs() < 1e-9);
        assert!((t.pvalue - 0.002).abs() < 5e-4, "{}", t.pvalue);
        let same = lr_from_logliks(-100.0, -100.0, 2);
        assert_eq!((same.statistic, same.pvalue), (0.0, 1.0));
        assert_eq!(lr_from_logliks(-99.0, -100.0, 1).statistic, 0.0);
        assert_eq!(nesting_df(kind("inar-poisson"), kind("gas-poisson")), Some(2));
        assert_eq!(nesting_df(kind("inar-negbin"), kind("rc-negbin")), Some(1));
        assert_eq!(nesting_df(kind("inar-poisson"), kind("gas-negbin")), None);
        assert_eq!(nesting_df(kind("gas-poisson"), kind("inar-poisson")), None);
    }

    #[test]
    fn rejects_degenerate_series() {
        let zeros = CountSeries::new(vec![0; 50]);
        let opts = FitOptions::default();
        assert!(matches!(fit(kind("gas-poisson"), &zeros, &opts), Err(Error::NoSurvivalInformation(_))));
        assert!(matches!(
            fit(kind("rc-negbin"), &CountSeries::new(vec![4; 30]), &opts),
            Err(Error::NoSurvivalInformation(_))
        ));
        assert!(matches!(fit(kind("inar-poisson"), &CountSeries::new(vec![1, 2, 3]), &opts), Err(Error::Input(_))));
    }

    #[test]
    fn static_fit_recovers_alpha() {
        let truth = ModelSpec::Static { alpha: 0.5, error: ErrorSpec::poisson(5.0) };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sim = simulate_model(&truth, 2000, &mut rng).unwrap();
        let f = fit(kind("inar-poisson"), &sim.series, &FitOptions::default()).unwrap();
        let ModelSpec::Static { alpha, error } = f.model else { panic!() };
        assert!((alpha - 0.5).abs() < 0.05, "{alpha}");

        // Independent grid-search oracle over (α, μ).
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 1..100 {
            for j in 0..80 {
                let a = i as f64 / 100.0;
                let mu = 3.0 + j as f64 * 0.05;
                let ll = ModelSpec::Static { alpha: a, error: ErrorSpec::poisson(mu) }
                    .log_likelihood(&sim.series)
                    .unwrap()
                    .sum;
                if ll > best.0 {
                    best = (ll, a, mu);
                }
            }
        }
        assert!((alpha - best.1).abs() <= 0.011, "{alpha} vs grid {}", best.1);
        assert!((error.mean() - best.2).abs() <= 0.06);
        assert!(f.loglik_sum >= best.0 - 1e-9);
        assert!(f.converged);
        assert!((f.aic - (2.0 * 2.0 - 2.0 * f.loglik_sum)).abs() < 1e-12);
        assert!((f.loglik_avg - f.loglik_sum / 1999.0).abs() < 1e-12);
    }

    #[test]
    fn gas_fit_dominates_static_and_is_reparametrization_invariant() {
        let truth = ModelSpec::gas(GasParams::with_mean_logit(-0.5, 0.9, 0.15, ErrorSpec::poisson(6.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sim = simulate_model(&truth, 500, &mut rng).unwrap();
        let opts = FitOptions::default();
        let gas = fit(kind("gas-poisson"), &sim.series, &opts).unwrap();
        let stat = fit(kind("inar-poisson"), &sim.series, &opts).unwrap();
        assert!(gas.loglik_sum >= stat.loglik_sum - 1e-6);
        let lr = lr_test(&stat, &gas).unwrap();
        assert_eq!(lr.df, 2);
        assert!(lr_test(&gas, &stat).is_err());

        let refit = fit_with_starts(kind("gas-poisson"), &sim.series, &opts, &[gas.model]).unwrap();
        assert!(refit.loglik_sum >= gas.loglik_sum - 1e-8);
        assert!((refit.loglik_sum - gas.loglik_sum).abs() < 1e-6);
        assert!(gas.std_errors.is_some());
    }

    #[test]
    fn restarts_are_monotone() {
        let truth = ModelSpec::gas(GasParams::new(-0.2, 0.8, 0.2, ErrorSpec::negative_binomial(3.0, 6.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sim = simulate_model(&truth, 300, &mut rng).unwrap();
        let mut last = f64::NEG_INFINITY;
        for restarts in 1..=4 {
            let opts = FitOptions { restarts, seed: 4, ..FitOptions::default() };
            let f = fit(kind("gas-negbin"), &sim.series, &opts).unwrap();
            assert!(f.trace.best_objective >= last);
            last = f.trace.best_objective;
        }
    }

    #[test]
    fn delta_method_matches_natural_space_hessian() {
        let truth = ModelSpec::Static { alpha: 0.4, error: ErrorSpec::poisson(4.0) };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let sim = simulate_model(&truth, 1500, &mut rng).unwrap();
        let f = fit(kind("inar-poisson"), &sim.series, &FitOptions::default()).unwrap();
        let se = f.std_errors.clone().unwrap();

        // Second route: Hessian taken directly in (α, μ).
        let nat = f.model.natural_params();
        let direct = unconstrained_covariance(
            |p| match ModelSpec::from_natural(f.kind(), p) {
                Ok(m) if m.validate().is_ok() => m.log_likelihood(&sim.series).unwrap().sum,
                _ => f64::NEG_INFINITY,
            },
            &nat,
        )
        .unwrap();
        for i in 0..2 {
            let d = direct[i][i].sqrt();
            assert!(((se[i] - d) / d).abs() < 0.05, "{i}: {} vs {d}", se[i]);
        }
        assert_eq!(std_errors(&f, &sim.series).unwrap(), se);
    }
}
