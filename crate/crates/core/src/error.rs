use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("retry budget exhausted while sampling a direction")]
    RetryBudgetExhausted,

    #[error("materialization refused: input dimension {dim} exceeds cap {cap}")]
    MaterializeCapExceeded { dim: usize, cap: usize },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    JacobiNoConvergence { sweeps: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed matrix CSV at line {line}: {reason}")]
    MatrixCsv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
