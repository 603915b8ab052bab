use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not symmetric: |M[{i},{j}] - M[{j},{i}]| exceeds tolerance")]
    NotSymmetric { i: usize, j: usize },

    #[error("non-finite entry at ({i},{j})")]
    NonFinite { i: usize, j: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("no candidate indices available: {0}")]
    NoCandidate(&'static str),

    #[error("matrix text format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
