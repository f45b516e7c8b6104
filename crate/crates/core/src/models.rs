//! GAS-INAR, static INAR and rc-INAR behind one conditional-model interface.
//!
//! Every model is an INAR(1) with some survival-probability path: the path
//! plus the error pmf fully determine the conditional pmf of each `y_t`, so
//! estimation, forecasting and evaluation never need to know which model
//! they are working with.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::ErrorSpec;
use crate::error::{domain, Error, Result};
use crate::filter::{self, GasParams};
use crate::math::{logistic, logit, saturate};
use crate::score::Kernel;
use crate::series::CountSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFamily {
    Poisson,
    NegativeBinomial,
}

impl ErrorFamily {
    pub fn n_params(self) -> usize {
        match self {
            ErrorFamily::Poisson => 1,
            ErrorFamily::NegativeBinomial => 2,
        }
    }
}

/// How the survival probability evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    /// Score-driven recursion.
    Gas,
    /// Constant α.
    Static,
    /// `logit α_t = ω + τ y_{t-1}`.
    Rc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelKind {
    pub dynamics: Dynamics,
    pub family: ErrorFamily,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::new(Dynamics::Gas, ErrorFamily::Poisson),
        ModelKind::new(Dynamics::Gas, ErrorFamily::NegativeBinomial),
        ModelKind::new(Dynamics::Static, ErrorFamily::Poisson),
        ModelKind::new(Dynamics::Static, ErrorFamily::NegativeBinomial),
        ModelKind::new(Dynamics::Rc, ErrorFamily::Poisson),
        ModelKind::new(Dynamics::Rc, ErrorFamily::NegativeBinomial),
    ];

    pub const fn new(dynamics: Dynamics, family: ErrorFamily) -> Self {
        ModelKind { dynamics, family }
    }

    pub fn n_params(self) -> usize {
        let dynamic = match self.dynamics {
            Dynamics::Gas => 3,
            Dynamics::Static => 1,
            Dynamics::Rc => 2,
        };
        dynamic + self.family.n_params()
    }

    /// Names of the natural parameters, in the order used by estimation.
    pub fn param_names(self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = match self.dynamics {
            Dynamics::Gas => alloc::vec!["omega", "beta", "tau"],
            Dynamics::Static => alloc::vec!["alpha"],
            Dynamics::Rc => alloc::vec!["omega", "tau"],
        };
        names.push("mean");
        if self.family == ErrorFamily::NegativeBinomial {
            names.push("variance");
        }
        names
    }

    pub fn name(self) -> &'static str {
        match (self.dynamics, self.family) {
            (Dynamics::Gas, ErrorFamily::Poisson) => "gas-poisson",
            (Dynamics::Gas, ErrorFamily::NegativeBinomial) => "gas-negbin",
            (Dynamics::Static, ErrorFamily::Poisson) => "inar-poisson",
            (Dynamics::Static, ErrorFamily::NegativeBinomial) => "inar-negbin",
            (Dynamics::Rc, ErrorFamily::Poisson) => "rc-poisson",
            (Dynamics::Rc, ErrorFamily::NegativeBinomial) => "rc-negbin",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(alloc::format!("unknown model kind {s:?}")))
    }
}

impl Serialize for ModelKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ModelKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dynamics", rename_all = "snake_case")]
pub enum ModelSpec {
    Gas { params: GasParams },
    Static { alpha: f64, error: ErrorSpec },
    Rc { omega: f64, tau: f64, error: ErrorSpec },
}

/// Summed and averaged log-likelihood over `n` contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood {
    pub sum: f64,
    pub avg: f64,
    pub n: usize,
}

impl LogLikelihood {
    fn from_sum(sum: f64, n: usize) -> Self {
        LogLikelihood { sum, avg: sum / n as f64, n }
    }
}

/// Per-time survival path of any model together with its likelihood terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPath {
    /// `logit α_t` for `t = 1..=T`.
    pub lambda: Vec<f64>,
    pub loglik_contrib: Vec<f64>,
    /// `logit α_{T+1}`.
    pub next_lambda: f64,
}

impl ModelSpec {
    pub fn gas(params: GasParams) -> Self {
        ModelSpec::Gas { params }
    }

    pub fn kind(&self) -> ModelKind {
        let family = match self.error() {
            ErrorSpec::Poisson { .. } => ErrorFamily::Poisson,
            ErrorSpec::NegativeBinomial { .. } => ErrorFamily::NegativeBinomial,
        };
        let dynamics = match self {
            ModelSpec::Gas { .. } => Dynamics::Gas,
            ModelSpec::Static { .. } => Dynamics::Static,
            ModelSpec::Rc { .. } => Dynamics::Rc,
        };
        ModelKind { dynamics, family }
    }

    pub fn error(&self) -> ErrorSpec {
        match *self {
            ModelSpec::Gas { params } => params.error,
            ModelSpec::Static { error, .. } | ModelSpec::Rc { error, .. } => error,
        }
    }

    pub fn n_params(&self) -> usize {
        self.kind().n_params()
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Gas { params } => params.validate(),
            ModelSpec::Static { alpha, error } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(domain!("static alpha must lie in (0, 1), got {alpha}"));
                }
                error.validate()
            }
            ModelSpec::Rc { omega, tau, error } => {
                if !omega.is_finite() || !tau.is_finite() {
                    return Err(domain!("rc-INAR omega and tau must be finite"));
                }
                error.validate()
            }
        }
    }

    /// Natural parameter values in [`ModelKind::param_names`] order.
    pub fn natural_params(&self) -> Vec<f64> {
        let mut v = match *self {
            ModelSpec::Gas { params } => alloc::vec![params.omega, params.beta, params.tau],
            ModelSpec::Static { alpha, .. } => alloc::vec![alpha],
            ModelSpec::Rc { omega, tau, .. } => alloc::vec![omega, tau],
        };
        match self.error() {
            ErrorSpec::Poisson { mean } => v.push(mean),
            ErrorSpec::NegativeBinomial { mean, variance } => {
                v.push(mean);
                v.push(variance);
            }
        }
        v
    }

    /// Inverse of [`ModelSpec::natural_params`].
    pub fn from_natural(kind: ModelKind, v: &[f64]) -> Result<Self> {
        if v.len() != kind.n_params() {
            return Err(Error::Arity { expected: kind.n_params(), got: v.len() });
        }
        let k = match kind.dynamics {
            Dynamics::Gas => 3,
            Dynamics::Static => 1,
            Dynamics::Rc => 2,
        };
        let error = match kind.family {
            ErrorFamily::Poisson => ErrorSpec::poisson(v[k]),
            ErrorFamily::NegativeBinomial => ErrorSpec::negative_binomial(v[k], v[k + 1]),
        };
        Ok(match kind.dynamics {
            Dynamics::Gas => ModelSpec::Gas { params: GasParams::new(v[0], v[1], v[2], error) },
            Dynamics::Static => ModelSpec::Static { alpha: v[0], error },
            Dynamics::Rc => ModelSpec::Rc { omega: v[0], tau: v[1], error },
        })
    }

    /// Logit survival probability for the first contribution, before any data.
    pub(crate) fn initial_lambda(&self, y_prev: u64) -> f64 {
        match *self {
            ModelSpec::Gas { params } => saturate(params.omega / (1.0 - params.beta)).0,
            ModelSpec::Static { alpha, .. } => saturate(logit(alpha)).0,
            ModelSpec::Rc { omega, tau, .. } => saturate(omega + tau * y_prev as f64).0,
        }
    }

    /// Advances `logit α` after observing `y` (with predecessor `y_prev`) at
    /// survival `lambda`. `score` is only used by the GAS model.
    #[inline]
    pub(crate) fn step_lambda(&self, lambda: f64, y: u64, score: f64) -> f64 {
        match *self {
            ModelSpec::Gas { params } => params.update(lambda, score).0,
            ModelSpec::Static { .. } => lambda,
            ModelSpec::Rc { omega, tau, .. } => saturate(omega + tau * y as f64).0,
        }
    }

    pub(crate) fn needs_score(&self) -> bool {
        matches!(self, ModelSpec::Gas { .. })
    }

    pub(crate) fn path_with(&self, kernel: &mut Kernel, series: &CountSeries) -> ModelPath {
        let n = series.n_transitions();
        let mut lambda_path = Vec::with_capacity(n);
        let mut contrib = Vec::with_capacity(n);
        let mut lambda = self.initial_lambda(series[0]);
        for w in series.windows(2) {
            lambda_path.push(lambda);
            let (ll, s) = if self.needs_score() {
                let e = kernel.evaluate(w[1], w[0], lambda);
                (e.log_predictive, e.score)
            } else {
                (kernel.log_predictive(w[1], w[0], lambda), 0.0)
            };
            contrib.push(ll);
            lambda = self.step_lambda(lambda, w[1], s);
        }
        ModelPath { lambda: lambda_path, loglik_contrib: contrib, next_lambda: lambda }
    }

    /// Summed log-likelihood; `self` must be valid and the kernel built for
    /// its error spec.
    pub(crate) fn loglik_sum_with(&self, kernel: &mut Kernel, series: &CountSeries) -> f64 {
        match self {
            ModelSpec::Gas { params } => filter::loglik_with(kernel, series, params),
            _ => {
                let mut lambda = self.initial_lambda(series[0]);
                let mut total = 0.0;
                for w in series.windows(2) {
                    total += kernel.log_predictive(w[1], w[0], lambda);
                    lambda = self.step_lambda(lambda, w[1], 0.0);
                }
                total
            }
        }
    }

    fn checked(&self, series: &CountSeries) -> Result<Kernel> {
        self.validate()?;
        if series.len() < 2 {
            return Err(Error::Input(alloc::format!("need at least 2 observations, got {}", series.len())));
        }
        Ok(Kernel::new(self.error(), series.max()))
    }

    /// Survival-probability path and likelihood terms for `t = 1..=T`.
    pub fn path(&self, series: &CountSeries) -> Result<ModelPath> {
        let mut kernel = self.checked(series)?;
        Ok(self.path_with(&mut kernel, series))
    }

    /// Survival probability used in the conditional pmf of each `y_t`,
    /// `t = 1..=T`.
    pub fn alpha_path(&self, series: &CountSeries) -> Result<Vec<f64>> {
        Ok(self.path(series)?.lambda.into_iter().map(logistic).collect())
    }

    pub fn log_likelihood(&self, series: &CountSeries) -> Result<LogLikelihood> {
        let mut kernel = self.checked(series)?;
        let sum = self.loglik_sum_with(&mut kernel, series);
        Ok(LogLikelihood::from_sum(sum, series.n_transitions()))
    }

    /// Conditional pmf of the next count given `y_prev` and survival
    /// probability `alpha`, over the truncated support.
    pub fn conditional_pmf(&self, y_prev: u64, alpha: f64) -> Result<Vec<f64>> {
        crate::score::predictive_pmf(y_prev, alpha, &self.error())
    }
}
