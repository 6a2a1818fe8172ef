use thiserror::Error;

/// Errors produced by the block-tridiagonal solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("diagonal block {index} is not symmetric (deviation {deviation:.3e})")]
    AsymmetricBlock { index: usize, deviation: f64 },

    #[error("diagonal block {index} is singular")]
    SingularBlock { index: usize },

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: String },

    #[error("matrix is not symmetric (relative deviation {deviation:.3e})")]
    AsymmetricMatrix { deviation: f64 },

    #[error("negative curvature p'Sp = {curvature:.3e} at iteration {iteration}")]
    NegativeCurvature { iteration: usize, curvature: f64 },

    #[error("preconditioner {0} is not symmetric and cannot be used with PCG")]
    AsymmetricPreconditioner(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{problem}/{kind}: {source}")]
    Experiment {
        problem: String,
        kind: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
