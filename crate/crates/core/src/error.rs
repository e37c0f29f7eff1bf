use thiserror::Error;

/// Errors raised by estimators, p-value constructors and testing procedures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("sample is empty")]
    EmptySample,
    #[error("empty truncated set: cut {cut} lies below the smallest statistic {min}")]
    EmptyTruncatedSet { cut: f64, min: f64 },
    #[error("insufficient data: {got} statistics at or below the cut, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("statistic at position {index} is not finite")]
    NonFinite { index: usize },
    #[error("invalid support grid: {0}")]
    InvalidGrid(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
