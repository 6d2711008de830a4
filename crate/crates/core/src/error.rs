use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("data matrix has no rows")]
    EmptyData,
    #[error("invalid folds: {0}")]
    InvalidFolds(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
