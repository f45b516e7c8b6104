use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside its admissible region.
    #[error("parameter out of domain: {0}")]
    Domain(String),
    /// Malformed or insufficient input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// The series carries no information about the survival probability
    /// (all zeros or constant).
    #[error("no survival information: {0}")]
    NoSurvivalInformation(String),
    #[error("parameter vector has length {got}, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("models are not nested: {0}")]
    NotNested(String),
    /// Standard errors or covariance were requested but the Hessian is not
    /// negative definite at the estimate.
    #[error("covariance unavailable: {0}")]
    CovarianceUnavailable(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
