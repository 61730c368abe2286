use thiserror::Error;

use num_complex::Complex64;

use crate::scalar::DomainTag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: DomainTag, right: DomainTag },

    #[error("operation not supported over the {0} domain")]
    UnsupportedDomain(DomainTag),

    #[error("residual is undefined against the zero vector")]
    UndefinedResidual,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cone or subspace is not invariant: {0}")]
    NotInvariant(String),

    #[error("Kleene star diverges: max cycle mean {0} exceeds 1")]
    Divergent(f64),

    #[error("iteration failed after {iterations} steps: {reason}")]
    IterationFailure { iterations: usize, reason: String },

    #[error("root finding did not converge after {iterations} iterations")]
    RootFindingFailure {
        iterations: usize,
        best: Vec<Complex64>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("semigroup classification is unknown within the configured bounds")]
    UnknownClassification,
}
