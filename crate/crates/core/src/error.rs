use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid set specification: {0}")]
    InvalidSet(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("marginals are inconsistent: {0}")]
    Inconsistent(String),

    #[error("support threshold discarded mass {deficit:.3e} (limit {limit:.1e})")]
    MassLoss { deficit: f64, limit: f64 },

    #[error("function is not supported inside the admissible set: {0}")]
    SupportViolation(String),

    #[error("lambda {lambda} outside admissible interval [{lower}, {upper}]")]
    LambdaOutOfRange { lambda: f64, lower: f64, upper: f64 },

    #[error("quadrature did not converge: estimate {value}, error {error:.3e}")]
    Quadrature { value: f64, error: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("no negativity witness in catalog (best value {best:.3e})")]
    NoWitness { best: f64 },

    #[error("grid too large: {0}")]
    GridTooLarge(String),

    #[error("malformed field data: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
