//! Binomial thinning, simulation from any [`ModelSpec`], and the four
//! deterministic time-varying survival processes used to study filtering
//! under misspecification.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::distributions::ErrorSpec;
use crate::error::{domain, Result};
use crate::math::{logistic, sin};
use crate::models::ModelSpec;
use crate::score::Kernel;
use crate::series::CountSeries;

/// Discarded warm-up steps before the returned observations.
pub const BURN_IN: usize = 200;

/// `α ∘ n`: the number of successes among `n` Bernoulli(α) trials.
pub fn thin<R: Rng + ?Sized>(n: u64, alpha: f64, rng: &mut R) -> u64 {
    if n == 0 || alpha <= 0.0 {
        return 0;
    }
    if alpha >= 1.0 {
        return n;
    }
    Binomial::new(n, alpha).expect("probability in (0, 1)").sample(rng)
}

/// Survival processes with a known, deterministic path `α_t^o`; the error
/// term is always Poisson with mean 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgpKind {
    /// `0.5 + 0.25 sin(π t / 100)`.
    FastSine,
    /// `0.5 + 0.25 sin(π t / 250)`.
    SlowSine,
    /// 0.75 while `sin(π t / 100) > 0`, else 0.25.
    FastSteps,
    /// 0.75 while `sin(π t / 250) > 0`, else 0.25.
    SlowSteps,
}

impl DgpKind {
    pub const ALL: [DgpKind; 4] = [DgpKind::FastSine, DgpKind::SlowSine, DgpKind::FastSteps, DgpKind::SlowSteps];

    pub fn error(self) -> ErrorSpec {
        ErrorSpec::poisson(5.0)
    }

    fn period(self) -> i64 {
        match self {
            DgpKind::FastSine | DgpKind::FastSteps => 100,
            DgpKind::SlowSine | DgpKind::SlowSteps => 250,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DgpKind::FastSine => "fast-sine",
            DgpKind::SlowSine => "slow-sine",
            DgpKind::FastSteps => "fast-steps",
            DgpKind::SlowSteps => "slow-steps",
        }
    }
}

/// The deterministic `α_t^o`. Defined for every integer `t` so the burn-in
/// can run at negative times.
pub fn dgp_alpha(kind: DgpKind, t: i64) -> f64 {
    let period = kind.period();
    // Reduce to one full cycle of length 2·period before taking the sine.
    let phase = t.rem_euclid(2 * period);
    match kind {
        DgpKind::FastSine | DgpKind::SlowSine => 0.5 + 0.25 * sin(core::f64::consts::PI * phase as f64 / period as f64),
        DgpKind::FastSteps | DgpKind::SlowSteps => {
            // sin(π t / P) > 0 exactly when the phase lies strictly inside (0, P).
            if phase > 0 && phase < period {
                0.75
            } else {
                0.25
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSeries {
    pub series: CountSeries,
    /// Survival probability that generated each observation (same length
    /// as the series).
    pub true_alpha: Vec<f64>,
    /// `logit α` used for the transition to the second observation. Passing
    /// it as the filter initialization replays the simulated path exactly.
    pub initial_logit: Option<f64>,
}

/// Where to simulate from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Model(ModelSpec),
    Dgp(DgpKind),
}

pub fn simulate<R: Rng + ?Sized>(source: &Source, len: usize, rng: &mut R) -> Result<SimulatedSeries> {
    match source {
        Source::Model(m) => simulate_model(m, len, rng),
        Source::Dgp(k) => Ok(simulate_dgp(*k, len, rng)?),
    }
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 {
        return Err(domain!("simulated series needs at least 2 observations, got {len}"));
    }
    Ok(())
}

/// First burn-in value, drawn with mean `μ / (1 - ᾱ)` and the error's
/// dispersion ratio.
fn initial_count<R: Rng + ?Sized>(error: &ErrorSpec, mean_alpha: f64, rng: &mut R) -> u64 {
    let scale = 1.0 / (1.0 - mean_alpha.clamp(0.0, 0.99));
    let spec = match *error {
        ErrorSpec::Poisson { mean } => ErrorSpec::poisson(mean * scale),
        ErrorSpec::NegativeBinomial { mean, variance } => ErrorSpec::negative_binomial(mean * scale, variance * scale),
    };
    spec.sample_unchecked(rng)
}

/// Simulates `len` observations from `model` after [`BURN_IN`] warm-up steps.
pub fn simulate_model<R: Rng + ?Sized>(model: &ModelSpec, len: usize, rng: &mut R) -> Result<SimulatedSeries> {
    check_len(len)?;
    model.validate()?;
    let error = model.error();
    let mean_alpha = match *model {
        ModelSpec::Gas { params } => logistic(params.omega / (1.0 - params.beta)),
        ModelSpec::Static { alpha, .. } => alpha,
        ModelSpec::Rc { omega, tau, .. } => logistic(omega + tau * error.mean()),
    };
    let mut y = initial_count(&error, mean_alpha, rng);
    let mut lambda = model.initial_lambda(y);
    let mut kernel = Kernel::new(error, y);
    let mut values = Vec::with_capacity(len);
    let mut alphas = Vec::with_capacity(len);
    let mut initial_logit = None;
    for step in 0..BURN_IN + len {
        let alpha = logistic(lambda);
        let next = thin(y, alpha, rng) + error.sample_unchecked(rng);
        let score = if model.needs_score() { kernel.evaluate(next, y, lambda).score } else { 0.0 };
        if step >= BURN_IN {
            values.push(next);
            alphas.push(alpha);
        }
        lambda = model.step_lambda(lambda, next, score);
        if step == BURN_IN {
            initial_logit = Some(lambda);
        }
        y = next;
    }
    Ok(SimulatedSeries { series: CountSeries::new(values), true_alpha: alphas, initial_logit })
}

/// Simulates `len` observations from a time-varying DGP. The observation at
/// position `i` is generated with survival probability `dgp_alpha(kind, i)`.
pub fn simulate_dgp<R: Rng + ?Sized>(kind: DgpKind, len: usize, rng: &mut R) -> Result<SimulatedSeries> {
    check_len(len)?;
    let error = kind.error();
    let mut y = initial_count(&error, 0.5, rng);
    let mut values = Vec::with_capacity(len);
    let mut alphas = Vec::with_capacity(len);
    for t in -(BURN_IN as i64)..len as i64 {
        let alpha = dgp_alpha(kind, t);
        y = thin(y, alpha, rng) + error.sample_unchecked(rng);
        if t >= 0 {
            values.push(y);
            alphas.push(alpha);
        }
    }
    Ok(SimulatedSeries { series: CountSeries::new(values), true_alpha: alphas, initial_logit: None })
}
