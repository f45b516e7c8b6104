//! Predictive pmf of `y_t` given `y_{t-1}` and the survival probability, and
//! its first two derivatives with respect to `logit α`.
//!
//! With weights `p_k = C(y_{t-1}, k) α^k (1-α)^{y_{t-1}-k} p_e(y_t - k)` for
//! `k = 0..=m`, `m = min(y_t, y_{t-1})`:
//!
//! - the predictive pmf is `Σ_k p_k`,
//! - the score is `E_w[k] - y_{t-1} α`,
//! - its derivative is `Var_w[k] - α(1-α) y_{t-1}`,
//!
//! where `E_w`/`Var_w` are moments of `k` under the normalized weights. The
//! variance form is the algebraic reduction of the double sum
//! `Σ_j Σ_k p_k p_j (k(k-j) - α(1-α) y_{t-1}) / (Σ p)^2`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::distributions::{truncated_support_len, ErrorSpec, LogPmfTable};
use crate::error::{domain, Result};
use crate::math::{exp, lgamma, log, log1p, log_alpha_pair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreEvaluation {
    pub log_predictive: f64,
    pub score: f64,
    pub score_derivative: f64,
    /// `min(y_t, y_{t-1})`.
    pub m: u64,
}

/// Log-factorials `ln n!` for `n = 0..len`, extended on demand.
#[derive(Debug, Clone, Default)]
pub(crate) struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn ensure(&mut self, upto: u64) {
        let needed = upto as usize + 1;
        let start = self.0.len();
        if start < needed {
            self.0.extend((start..needed).map(|n| lgamma(n as f64 + 1.0)));
        }
    }

    #[inline]
    fn ln_choose(&self, n: u64, k: u64) -> f64 {
        self.0[n as usize] - self.0[k as usize] - self.0[(n - k) as usize]
    }
}

/// Evaluation workspace: cached log-factorials and error log-pmf plus a
/// scratch buffer for the log weights.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    lnfact: LnFactorials,
    errors: LogPmfTable,
    scratch: Vec<f64>,
}

impl Kernel {
    /// `spec` must already be validated.
    pub fn new(spec: ErrorSpec, upto: u64) -> Self {
        let mut lnfact = LnFactorials::default();
        lnfact.ensure(upto);
        Kernel { lnfact, errors: LogPmfTable::new(spec, upto), scratch: Vec::new() }
    }

    pub fn spec(&self) -> &ErrorSpec {
        self.errors.spec()
    }

    /// Swaps the error pmf, keeping the log-factorial cache.
    pub fn set_spec(&mut self, spec: ErrorSpec) {
        let upto = self.lnfact.0.len().saturating_sub(1) as u64;
        self.errors = LogPmfTable::new(spec, upto);
    }

    #[inline]
    pub fn ensure(&mut self, upto: u64) {
        self.lnfact.ensure(upto);
        self.errors.ensure(upto);
    }

    /// Fills the scratch buffer with log weights and returns their maximum.
    fn log_weights(&mut self, y: u64, y_prev: u64, ln_a: f64, ln_b: f64) -> f64 {
        self.ensure(y.max(y_prev));
        let m = y.min(y_prev);
        self.scratch.clear();
        let mut max = f64::NEG_INFINITY;
        for k in 0..=m {
            let mut lw = self.lnfact.ln_choose(y_prev, k) + self.errors.get(y - k);
            // Avoid 0·(-inf) at the boundaries α ∈ {0, 1}.
            if k > 0 {
                lw += k as f64 * ln_a;
            }
            if y_prev > k {
                lw += (y_prev - k) as f64 * ln_b;
            }
            max = max.max(lw);
            self.scratch.push(lw);
        }
        max
    }

    /// Log predictive pmf only.
    pub fn log_predictive_logs(&mut self, y: u64, y_prev: u64, ln_a: f64, ln_b: f64) -> f64 {
        let max = self.log_weights(y, y_prev, ln_a, ln_b);
        let total: f64 = self.scratch.iter().map(|&lw| exp(lw - max)).sum();
        max + log(total)
    }

    pub fn log_predictive(&mut self, y: u64, y_prev: u64, lambda: f64) -> f64 {
        let (ln_a, ln_b) = log_alpha_pair(lambda);
        self.log_predictive_logs(y, y_prev, ln_a, ln_b)
    }

    /// Full evaluation from `(ln α, ln(1-α))`.
    pub fn evaluate_logs(&mut self, y: u64, y_prev: u64, ln_a: f64, ln_b: f64) -> ScoreEvaluation {
        let max = self.log_weights(y, y_prev, ln_a, ln_b);
        let m = y.min(y_prev);
        if y_prev == 0 {
            return ScoreEvaluation { log_predictive: max, score: 0.0, score_derivative: 0.0, m };
        }
        let mut total = 0.0;
        let mut first = 0.0;
        for (k, lw) in self.scratch.iter_mut().enumerate() {
            let w = exp(*lw - max);
            *lw = w;
            total += w;
            first += w * k as f64;
        }
        let mean_k = first / total;
        let var_k = self
            .scratch
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let d = k as f64 - mean_k;
                w * d * d
            })
            .sum::<f64>()
            / total;
        let n = y_prev as f64;
        let alpha = exp(ln_a);
        let alpha_var = exp(ln_a + ln_b);
        ScoreEvaluation {
            log_predictive: max + log(total),
            score: mean_k - n * alpha,
            score_derivative: var_k - alpha_var * n,
            m,
        }
    }

    /// Full evaluation at `logit α = lambda`.
    pub fn evaluate(&mut self, y: u64, y_prev: u64, lambda: f64) -> ScoreEvaluation {
        let (ln_a, ln_b) = log_alpha_pair(lambda);
        self.evaluate_logs(y, y_prev, ln_a, ln_b)
    }

    /// Predictive pmf over the truncated support at `logit α = lambda`.
    pub fn predictive_pmf(&mut self, y_prev: u64, lambda: f64) -> Vec<f64> {
        let (ln_a, ln_b) = log_alpha_pair(lambda);
        self.predictive_pmf_logs(y_prev, ln_a, ln_b)
    }

    pub fn predictive_pmf_logs(&mut self, y_prev: u64, ln_a: f64, ln_b: f64) -> Vec<f64> {
        self.ensure(y_prev);
        // Binomial(y_prev, α) pmf convolved with p_e in linear space.
        let binom: Vec<f64> = (0..=y_prev)
            .map(|k| {
                let mut lw = self.lnfact.ln_choose(y_prev, k);
                if k > 0 {
                    lw += k as f64 * ln_a;
                }
                if y_prev > k {
                    lw += (y_prev - k) as f64 * ln_b;
                }
                exp(lw)
            })
            .collect();
        let mean = y_prev as f64 * exp(ln_a) + self.spec().mean();
        let errors = &mut self.errors;
        let mut values = Vec::new();
        let len = truncated_support_len(mean, |y| {
            errors.ensure(y);
            let p: f64 = binom[..=y.min(y_prev) as usize]
                .iter()
                .enumerate()
                .map(|(k, b)| b * errors.get_linear(y - k as u64))
                .sum();
            values.push(p);
            p
        });
        values.truncate(len);
        values
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain!("survival probability must lie in (0, 1), got {alpha}"))
    }
}

fn kernel_for(spec: &ErrorSpec, alpha: f64, upto: u64) -> Result<(Kernel, f64, f64)> {
    check_alpha(alpha)?;
    spec.validate()?;
    Ok((Kernel::new(*spec, upto), log(alpha), log1p(-alpha)))
}

/// Score, its derivative and the log predictive pmf in one pass.
pub fn evaluate(y: u64, y_prev: u64, alpha: f64, spec: &ErrorSpec) -> Result<ScoreEvaluation> {
    let (mut kernel, ln_a, ln_b) = kernel_for(spec, alpha, y.max(y_prev))?;
    Ok(kernel.evaluate_logs(y, y_prev, ln_a, ln_b))
}

/// `log p(y | α, y_prev, ξ)`: binomial thinning of `y_prev` convolved with the
/// error pmf.
pub fn predictive_log_pmf(y: u64, y_prev: u64, alpha: f64, spec: &ErrorSpec) -> Result<f64> {
    let (mut kernel, ln_a, ln_b) = kernel_for(spec, alpha, y.max(y_prev))?;
    Ok(kernel.log_predictive_logs(y, y_prev, ln_a, ln_b))
}

/// `∂ log p(y | α, y_prev, ξ) / ∂ logit α`.
pub fn score(y: u64, y_prev: u64, alpha: f64, spec: &ErrorSpec) -> Result<f64> {
    evaluate(y, y_prev, alpha, spec).map(|e| e.score)
}

/// Derivative of [`score`] with respect to `logit α`.
pub fn score_derivative(y: u64, y_prev: u64, alpha: f64, spec: &ErrorSpec) -> Result<f64> {
    evaluate(y, y_prev, alpha, spec).map(|e| e.score_derivative)
}

/// Predictive pmf `p(· | α, y_prev, ξ)` over the truncated support.
pub fn predictive_pmf(y_prev: u64, alpha: f64, spec: &ErrorSpec) -> Result<Vec<f64>> {
    let (mut kernel, ln_a, ln_b) = kernel_for(spec, alpha, y_prev)?;
    Ok(kernel.predictive_pmf_logs(y_prev, ln_a, ln_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{ln_choose, logistic, logit};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poisson(mean: f64) -> ErrorSpec {
        ErrorSpec::poisson(mean)
    }

    // Literal transcription of the double-sum formula, no log-space tricks.
    fn double_sum_derivative(y: u64, y_prev: u64, alpha: f64, spec: &ErrorSpec) -> f64 {
        let m = y.min(y_prev);
        let p: Vec<f64> = (0..=m)
            .map(|k| {
                ln_choose(y_prev, k).exp()
                    * alpha.powi(k as i32)
                    * (1.0 - alpha).powi((y_prev - k) as i32)
                    * spec.pmf(y - k).unwrap()
            })
            .collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, pj) in p.iter().enumerate() {
            for (k, pk) in p.iter().enumerate() {
                let (j, k) = (j as f64, k as f64);
                num += pk * pj * (k * (k - j) - alpha * (1.0 - alpha) * y_prev as f64);
                den += pk * pj;
            }
        }
        num / den
    }

    #[test]
    fn no_survivors_reduces_to_error_pmf() {
        let spec = poisson(5.0);
        for y in 0..30 {
            for &a in &[0.01, 0.5, 0.99] {
                let e = evaluate(y, 0, a, &spec).unwrap();
                assert_eq!(e.log_predictive, spec.log_pmf(y).unwrap());
                assert_eq!(e.score, 0.0);
                assert_eq!(e.score_derivative, 0.0);
            }
        }
    }

    #[test]
    fn convolution_matches_closed_form() {
        // k = 0..2: 0.125 e^{-5} (25/2 + 3·5 + 3) = 3.8125 e^{-5}.
        let got = predictive_log_pmf(2, 3, 0.5, &poisson(5.0)).unwrap();
        assert!((got - (3.8125f64.ln() - 5.0)).abs() < 1e-14, "{got}");
    }

    #[test]
    fn small_survival_after_large_count_gives_negative_score() {
        assert!(score(2, 20, 0.5, &poisson(5.0)).unwrap() < 0.0);
        assert!(score(25, 20, 0.5, &poisson(5.0)).unwrap() > 0.0);
    }

    #[test]
    fn score_matches_finite_difference() {
        let spec = poisson(5.0);
        let lam = logit(0.4);
        let h = 1e-6;
        let f = |l: f64| predictive_log_pmf(7, 5, logistic(l), &spec).unwrap();
        let fd = (f(lam + h) - f(lam - h)) / (2.0 * h);
        let s = score(7, 5, 0.4, &spec).unwrap();
        assert!(((s - fd) / s).abs() < 1e-5, "{s} {fd}");

        let g = |l: f64| score(7, 5, logistic(l), &spec).unwrap();
        let fd2 = (g(lam + h) - g(lam - h)) / (2.0 * h);
        let d = score_derivative(7, 5, 0.4, &spec).unwrap();
        assert!(((d - fd2) / d).abs() < 1e-5, "{d} {fd2}");
    }

    #[test]
    fn variance_form_equals_double_sum() {
        for spec in [poisson(5.0), poisson(0.7), ErrorSpec::negative_binomial(3.0, 9.0)] {
            for y in 0..=10 {
                for y_prev in 0..=10 {
                    for &a in &[0.05, 0.3, 0.5, 0.81, 0.95] {
                        let got = score_derivative(y, y_prev, a, &spec).unwrap();
                        let want = double_sum_derivative(y, y_prev, a, &spec);
                        assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "{y} {y_prev} {a}");
                    }
                }
            }
        }
    }

    #[test]
    fn predictive_pmf_normalizes() {
        let spec = ErrorSpec::negative_binomial(6.0, 15.0);
        let pmf = predictive_pmf(10, 0.7, &spec).unwrap();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn score_has_zero_conditional_mean() {
        for spec in [poisson(5.0), ErrorSpec::negative_binomial(6.0, 15.0)] {
            for y_prev in [0u64, 1, 5, 20, 60] {
                for &a in &[0.05, 0.5, 0.93] {
                    let pmf = predictive_pmf(y_prev, a, &spec).unwrap();
                    let mean: f64 =
                        pmf.iter().enumerate().map(|(y, p)| p * score(y as u64, y_prev, a, &spec).unwrap()).sum();
                    assert!(mean.abs() < 1e-8, "{y_prev} {a} {mean}");
                }
            }
        }
    }

    #[test]
    fn large_counts_do_not_overflow() {
        let e = evaluate(2500, 3000, 0.8, &poisson(50.0)).unwrap();
        assert!(e.log_predictive.is_finite() && e.score.is_finite());
        assert!(e.score_derivative.is_finite());
    }

    #[test]
    fn out_of_range_alpha_is_rejected() {
        for a in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(score(1, 2, a, &poisson(1.0)).is_err());
        }
    }

    #[test]
    fn lemma_bounds_hold_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let y = rng.random_range(0..=100u64);
            let y_prev = rng.random_range(0..=100u64);
            let a = rng.random_range(0.001..0.999);
            let mean = rng.random_range(0.1..30.0);
            let spec = if rng.random_bool(0.5) {
                poisson(mean)
            } else {
                ErrorSpec::negative_binomial(mean, mean * rng.random_range(1.01..5.0))
            };
            let e = evaluate(y, y_prev, a, &spec).unwrap();
            let n = y_prev as f64;
            let m = e.m as f64;
            assert!(e.score.abs() <= 2.0 * n + 1e-9);
            assert!(e.score_derivative >= -n / 4.0 - 1e-9);
            assert!(e.score_derivative <= m * m + 1e-9);
        }
    }
}
