//! Score-driven filter for the logit survival probability:
//!
//! `logit α_{t+1} = ω + β logit α_t + τ s_t(α_t, ξ)`.
//!
//! Indexing: the series is `y_0, ..., y_T`. `y_0` only conditions; the path
//! has one entry per likelihood contribution `t = 1..=T`, and `lambda[0]`
//! (the value for `t = 1`) is the initialization. The score that moves
//! `lambda` from `t` to `t + 1` is evaluated at the current `alpha[t]`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::distributions::ErrorSpec;
use crate::error::{domain, Error, Result};
use crate::math::{fabs, logistic, saturate};
use crate::score::Kernel;
use crate::series::CountSeries;

/// Static parameters `(ω, β, τ, ξ)` of the GAS-INAR recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub omega: f64,
    pub beta: f64,
    pub tau: f64,
    pub error: ErrorSpec,
}

impl GasParams {
    pub fn new(omega: f64, beta: f64, tau: f64, error: ErrorSpec) -> Self {
        GasParams { omega, beta, tau, error }
    }

    /// Parameters whose intercept puts the unconditional mean of `logit α_t`
    /// at `mean_logit`, i.e. `ω = mean_logit·(1 - β)`.
    pub fn with_mean_logit(mean_logit: f64, beta: f64, tau: f64, error: ErrorSpec) -> Self {
        GasParams { omega: mean_logit * (1.0 - beta), beta, tau, error }
    }

    /// Unconditional mean of `logit α_t`, `ω / (1 - β)`.
    pub fn mean_logit(&self) -> f64 {
        self.omega / (1.0 - self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(fabs(self.beta) < 1.0) {
            return Err(domain!("|beta| must be below 1, got {}", self.beta));
        }
        if !self.omega.is_finite() || !self.tau.is_finite() {
            return Err(domain!("omega and tau must be finite"));
        }
        self.error.validate()
    }

    /// One step of the recursion, saturated to `±LOGIT_BOUND`.
    #[inline]
    pub fn update(&self, lambda: f64, score: f64) -> (f64, bool) {
        saturate(self.omega + self.beta * lambda + self.tau * score)
    }
}

/// `ω / (1 - β)`, the unconditional mean of `logit α_t`, saturated to the
/// admissible range.
pub fn default_init(params: &GasParams) -> Result<f64> {
    if !(fabs(params.beta) < 1.0) {
        return Err(domain!("|beta| must be below 1, got {}", params.beta));
    }
    Ok(saturate(params.omega / (1.0 - params.beta)).0)
}

/// Filtered quantities for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPath {
    /// `logit α̂_t`.
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub score: Vec<f64>,
    /// `log p(y_t | α̂_t, y_{t-1}, ξ)`.
    pub loglik_contrib: Vec<f64>,
    /// `logit α̂_{T+1}`, already determined by the data.
    pub next_lambda: f64,
    /// Number of updates clipped to `±LOGIT_BOUND`.
    pub saturations: usize,
}

impl FilterPath {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn loglik_sum(&self) -> f64 {
        self.loglik_contrib.iter().sum()
    }
}

pub fn run_filter(series: &CountSeries, params: &GasParams, init: Option<f64>) -> Result<FilterPath> {
    params.validate()?;
    if series.len() < 2 {
        return Err(Error::Input(alloc::format!("filter needs at least 2 observations, got {}", series.len())));
    }
    let mut kernel = Kernel::new(params.error, series.max());
    Ok(filter_with(&mut kernel, series, params, init))
}

/// Filter over a prepared kernel; `params` must be validated.
pub(crate) fn filter_with(
    kernel: &mut Kernel,
    series: &CountSeries,
    params: &GasParams,
    init: Option<f64>,
) -> FilterPath {
    let n = series.n_transitions();
    let mut path = FilterPath {
        lambda: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        score: Vec::with_capacity(n),
        loglik_contrib: Vec::with_capacity(n),
        next_lambda: 0.0,
        saturations: 0,
    };
    let start = init.unwrap_or_else(|| params.omega / (1.0 - params.beta));
    let (mut lambda, clipped) = saturate(start);
    path.saturations += clipped as usize;
    for w in series.windows(2) {
        let eval = kernel.evaluate(w[1], w[0], lambda);
        path.lambda.push(lambda);
        path.alpha.push(logistic(lambda));
        path.score.push(eval.score);
        path.loglik_contrib.push(eval.log_predictive);
        let (next, clipped) = params.update(lambda, eval.score);
        path.saturations += clipped as usize;
        lambda = next;
    }
    path.next_lambda = lambda;
    path
}

/// Summed log-likelihood only, skipping the path allocations.
pub(crate) fn loglik_with(kernel: &mut Kernel, series: &CountSeries, params: &GasParams) -> f64 {
    let mut lambda = saturate(params.omega / (1.0 - params.beta)).0;
    let mut total = 0.0;
    for w in series.windows(2) {
        let eval = kernel.evaluate(w[1], w[0], lambda);
        total += eval.log_predictive;
        lambda = params.update(lambda, eval.score).0;
    }
    total
}
