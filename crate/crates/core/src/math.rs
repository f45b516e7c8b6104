//! Scalar helpers shared across the crate. Elementary functions come from
//! `libm`, or from the platform through `std` when the `std` feature is on.

pub use libm::lgamma;

#[cfg(not(feature = "std"))]
pub use libm::{exp, fabs, log, log1p, sin, sqrt};

#[cfg(feature = "std")]
mod platform {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn fabs(x: f64) -> f64 {
        x.abs()
    }
    #[inline]
    pub fn log(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn log1p(x: f64) -> f64 {
        x.ln_1p()
    }
    #[inline]
    pub fn sin(x: f64) -> f64 {
        x.sin()
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
}

#[cfg(feature = "std")]
pub use platform::{exp, fabs, log, log1p, sin, sqrt};

/// Saturation bound for `logit α`; `logistic(±35)` is within 1e-15 of {0, 1}.
pub const LOGIT_BOUND: f64 = 35.0;

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    log(p) - log1p(-p)
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

/// `(log α, log(1 - α))` for `α = logistic(lambda)`.
#[inline]
pub fn log_alpha_pair(lambda: f64) -> (f64, f64) {
    (-softplus(-lambda), -softplus(lambda))
}

/// Clamps `logit α` into `[-LOGIT_BOUND, LOGIT_BOUND]`; the flag reports
/// whether the value was moved.
#[inline]
pub fn saturate(lambda: f64) -> (f64, bool) {
    if lambda > LOGIT_BOUND {
        (LOGIT_BOUND, true)
    } else if lambda < -LOGIT_BOUND {
        (-LOGIT_BOUND, true)
    } else if lambda.is_nan() {
        (0.0, true)
    } else {
        (lambda, false)
    }
}

/// `x^n` by repeated squaring.
pub fn pow_int(x: f64, n: i32) -> f64 {
    if n < 0 {
        return 1.0 / pow_int(x, -n);
    }
    let (mut base, mut e, mut acc) = (x, n as u32, 1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    lgamma(n as f64 + 1.0)
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `log Σ exp(x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + log(xs.iter().map(|&x| exp(x - max)).sum::<f64>())
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if fabs(term) < fabs(sum) * 1e-16 {
            break;
        }
    }
    sum * exp(-x + a * log(x) - lgamma(a))
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if fabs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    exp(-x + a * log(x) - lgamma(a)) * h
}

/// Upper tail probability of a chi-square distribution with `df` degrees of
/// freedom.
pub fn chi_square_sf(statistic: f64, df: u32) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
}
