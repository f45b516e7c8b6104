//! Error-term distributions `p_e(x, ξ)` with full support on the naturals.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::math::{lgamma, ln_factorial, log, log1p};

/// Parametric error-term pmf. The negative binomial is parametrized by its
/// mean and variance and requires strict overdispersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ErrorSpec {
    Poisson { mean: f64 },
    NegativeBinomial { mean: f64, variance: f64 },
}

/// Mass that may be left outside any truncated support.
pub const TAIL_MASS: f64 = 1e-12;

/// Hard cap on truncated supports; only reached by absurd parameters.
const MAX_SUPPORT: usize = 50_000_000;

/// Converts a negative binomial mean/variance pair into the (size, success
/// probability) parametrization.
pub fn negbin_size_prob(mean: f64, variance: f64) -> Result<(f64, f64)> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(domain!("negative binomial mean must be positive, got {mean}"));
    }
    if !(variance > mean && variance.is_finite()) {
        return Err(domain!("negative binomial variance must exceed the mean ({mean}), got {variance}"));
    }
    Ok((mean * mean / (variance - mean), mean / variance))
}

impl ErrorSpec {
    pub fn poisson(mean: f64) -> Self {
        ErrorSpec::Poisson { mean }
    }

    pub fn negative_binomial(mean: f64, variance: f64) -> Self {
        ErrorSpec::NegativeBinomial { mean, variance }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ErrorSpec::Poisson { mean } => {
                if mean > 0.0 && mean.is_finite() {
                    Ok(())
                } else {
                    Err(domain!("Poisson mean must be positive, got {mean}"))
                }
            }
            ErrorSpec::NegativeBinomial { mean, variance } => negbin_size_prob(mean, variance).map(|_| ()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ErrorSpec::Poisson { mean } | ErrorSpec::NegativeBinomial { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ErrorSpec::Poisson { mean } => mean,
            ErrorSpec::NegativeBinomial { variance, .. } => variance,
        }
    }

    /// Number of free parameters in `ξ`.
    pub fn n_params(&self) -> usize {
        match self {
            ErrorSpec::Poisson { .. } => 1,
            ErrorSpec::NegativeBinomial { .. } => 2,
        }
    }

    pub fn log_pmf(&self, x: u64) -> Result<f64> {
        self.validate()?;
        Ok(self.log_pmf_unchecked(x))
    }

    pub fn pmf(&self, x: u64) -> Result<f64> {
        self.log_pmf(x).map(libm::exp)
    }

    /// Log pmf for an already validated spec.
    pub(crate) fn log_pmf_unchecked(&self, x: u64) -> f64 {
        let xf = x as f64;
        match *self {
            ErrorSpec::Poisson { mean } => xf * log(mean) - mean - ln_factorial(x),
            ErrorSpec::NegativeBinomial { mean, variance } => {
                // Written around r(1 - p) = μp so that it stays accurate as
                // σ² → μ (r → ∞).
                let excess = variance - mean;
                let r = mean * mean / excess;
                let p = mean / variance;
                ln_rising_ratio(r, x) + xf * log(mean * p) - r * log1p(excess / mean) - ln_factorial(x)
            }
        }
    }

    /// One draw from the error distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        self.validate()?;
        Ok(self.sample_unchecked(rng))
    }

    pub(crate) fn sample_unchecked<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            ErrorSpec::Poisson { mean } => poisson_draw(mean, rng),
            ErrorSpec::NegativeBinomial { mean, variance } => {
                // Gamma-Poisson mixture: λ ~ Gamma(r, (1-p)/p).
                let r = mean * mean / (variance - mean);
                let p = mean / variance;
                let gamma = Gamma::new(r, (1.0 - p) / p).expect("validated shape and scale");
                poisson_draw(gamma.sample(rng), rng)
            }
        }
    }

    /// Length `M + 1` of the truncated support `0..=M` used for any infinite
    /// sum over this pmf.
    pub fn support_len(&self) -> usize {
        truncated_support_len(self.mean(), |x| libm::exp(self.log_pmf_unchecked(x)))
    }

    /// Pmf values over the truncated support.
    pub fn pmf_vec(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.support_len();
        Ok((0..n as u64).map(|x| libm::exp(self.log_pmf_unchecked(x))).collect())
    }
}

/// `log Γ(r + x) - log Γ(r) - x log r = Σ_{j<x} log(1 + j/r)`.
fn ln_rising_ratio(r: f64, x: u64) -> f64 {
    if r < 1e3 {
        lgamma(r + x as f64) - lgamma(r) - x as f64 * log(r)
    } else {
        (1..x).map(|j| log1p(j as f64 / r)).sum()
    }
}

fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(lambda).expect("positive rate").sample(rng);
    draw as u64
}

/// Truncation rule for infinite-support sums: keep adding terms until the
/// cumulative mass reaches `1 - TAIL_MASS` and at least `max(5·mean, 50)`
/// terms have been included. Returns the number of terms.
pub fn truncated_support_len(mean: f64, mut pmf: impl FnMut(u64) -> f64) -> usize {
    let min_terms = libm::ceil(5.0 * mean).max(50.0) as usize;
    let mut mass = 0.0;
    let mut n = 0usize;
    while n < MAX_SUPPORT && (n < min_terms || mass < 1.0 - TAIL_MASS) {
        mass += pmf(n as u64);
        n += 1;
    }
    n
}

/// Cached `log p_e(x)` and `p_e(x)` values, extended on demand.
#[derive(Debug, Clone)]
pub(crate) struct LogPmfTable {
    spec: ErrorSpec,
    values: Vec<f64>,
    linear: Vec<f64>,
}

impl LogPmfTable {
    pub fn new(spec: ErrorSpec, upto: u64) -> Self {
        let mut table = LogPmfTable { spec, values: Vec::new(), linear: Vec::new() };
        table.ensure(upto);
        table
    }

    pub fn ensure(&mut self, upto: u64) {
        let needed = upto as usize + 1;
        if self.values.len() < needed {
            let start = self.values.len() as u64;
            let spec = self.spec;
            self.values.extend((start..needed as u64).map(|x| spec.log_pmf_unchecked(x)));
            self.linear.extend(self.values[start as usize..].iter().map(|&v| libm::exp(v)));
        }
    }

    #[inline]
    pub fn get_linear(&self, x: u64) -> f64 {
        self.linear[x as usize]
    }

    #[inline]
    pub fn get(&self, x: u64) -> f64 {
        self.values[x as usize]
    }

    pub fn spec(&self) -> &ErrorSpec {
        &self.spec
    }
}
