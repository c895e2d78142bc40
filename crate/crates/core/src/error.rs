use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("quadrature tolerance not met: estimate {estimate:.3e} > target {target:.3e} (value {value})")]
    ToleranceNotMet { value: f64, estimate: f64, target: f64 },
    #[error("no sign change of B on [{lo}, {hi}]: B(lo) = {b_lo}, B(hi) = {b_hi}")]
    NoSignChange { lo: f64, hi: f64, b_lo: f64, b_hi: f64 },
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("table mismatch: {0}")]
    Mismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
