//! First-order integer-valued autoregressive (INAR) count models whose
//! survival probability follows a score-driven recursion.
//!
//! The crate is `no_std` with `alloc`; the `std` feature only swaps the
//! elementary functions for the platform's faster ones. Randomness is always supplied by the
//! caller as an explicit [`rand::Rng`], so every routine is deterministic given
//! its stream. File formats, the command-line tool and the parallel
//! replication harness live in the `gas-inar` companion crate.
//!
//! Layout:
//!
//! - [`distributions`]: error-term pmfs (Poisson, negative binomial).
//! - [`score`]: the thinning/error convolution and its logit derivatives.
//! - [`filter`]: the score-driven recursion for `logit α_t`.
//! - [`models`]: GAS-INAR, static INAR and rc-INAR behind one interface.
//! - [`estimation`]: maximum likelihood, standard errors, AIC, LR test.
//! - [`simulation`]: thinning, model simulation and time-varying DGPs.
//! - [`forecasting`]: exact one-step and Monte Carlo multi-step pmfs.
//! - [`diagnostics`]: contraction checks, KL/MSE metrics, bands, rolling evaluation.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod filter;
pub mod forecasting;
pub mod linalg;
pub mod math;
pub mod models;
pub mod optimize;
pub mod score;
pub mod series;
pub mod simulation;

pub use distributions::ErrorSpec;
pub use error::{Error, Result};
pub use estimation::{fit, FitOptions, FitResult};
pub use filter::{run_filter, FilterPath, GasParams};
pub use forecasting::ForecastDistribution;
pub use models::{ErrorFamily, ModelKind, ModelSpec};
pub use series::CountSeries;
