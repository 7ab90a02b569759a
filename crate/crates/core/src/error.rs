use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("matrix is not positive definite: leading minor {pivot} failed (pivot value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric: |S[{row}][{col}] - S[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not at a mode: finite-difference gradient norm {gradient_norm:e} exceeds tolerance {tolerance:e}")]
    NotAtMode { gradient_norm: f64, tolerance: f64 },

    #[error("index {index} out of range for {len} models")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
