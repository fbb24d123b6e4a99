use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A transform, copula or weight vector could not be built from its parameters.
    #[error("invalid parameters: {0}")]
    Construction(String),

    /// Inputs are individually valid but inconsistent with each other.
    #[error("usage error: {0}")]
    Usage(String),

    /// The decision threshold `Q_F(1 - alpha * n^(gamma-1))` does not exist.
    #[error("degenerate threshold: alpha * n^(gamma - 1) = {level} >= 1 (alpha = {alpha}, n = {n}, gamma = {gamma})")]
    DegenerateThreshold {
        alpha: f64,
        n: usize,
        gamma: f64,
        level: f64,
    },

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    Factorization { pivot: usize, value: f64 },

    /// A spectral measure, config or similar object failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The copula has no closed-form CDF in this library.
    #[error("no analytic CDF for the {0} copula")]
    UnsupportedAnalyticCdf(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
