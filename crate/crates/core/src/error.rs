use thiserror::Error;

use crate::cvec::CVec;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum UlamError {
    #[error("tuple is empty; degree must be at least 1")]
    Empty,
    #[error("component {index} is not finite")]
    NonFinite { index: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("degree {n} is outside the supported range {min}..={max}")]
    DegreeOutOfRange { n: usize, min: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, best: CVec },
    #[error("jacobian is singular to working precision")]
    SingularJacobian,
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("elimination oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, UlamError>;
