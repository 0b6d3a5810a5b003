use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum PovmError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigensolver did not converge (residual {residual:e})")]
    Numeric { residual: f64 },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("not a density matrix: {0}")]
    State(String),

    #[error("element {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { index: usize, min_eigenvalue: f64 },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("index {index} out of range 2..={max}")]
    Index { index: usize, max: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PovmError> = std::result::Result<T, E>;
