use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A state failed its invariants (Hermiticity, trace, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Operator-level validation failure: non-unitary block, POVM element
    /// outside [0,1], non-orthonormal basis, failed completeness sum.
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// Subsystem dimensions do not compose.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Requested instance exceeds a documented tractability guard.
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),

    /// A deterministic completion (unitary extension of prescribed rows)
    /// hit a rank defect beyond tolerance.
    #[error("completion failure: {0}")]
    CompletionFailure(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
