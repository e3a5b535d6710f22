use thiserror::Error;

/// Errors raised by the operator calculus, chart models and certificates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("half-dimension l must be at least 1 (got {0})")]
    ZeroDimension(usize),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("slot {slot} has the wrong variance for this operation")]
    WrongVariance { slot: usize },

    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("form degree {degree} is invalid here: {reason}")]
    Degree { degree: usize, reason: &'static str },

    #[error("frame is not symplectic: |g^T Omega g - Omega| = {0:e}")]
    NotSymplectic(f64),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("unsupported curvature: {0}")]
    UnsupportedCurvature(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
