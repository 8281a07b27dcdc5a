use thiserror::Error;

/// Errors raised across the inversion pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid twist parameters: {0}")]
    InvalidParams(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("truncation did not converge: {0}")]
    TruncationNotConverged(String),

    #[error("coset supports overlap: {0}")]
    OverlappingSupports(String),

    #[error("determinant of a {n}x{n} matrix exceeds the configured cap of {cap}")]
    DeterminantTooLarge { n: usize, cap: usize },

    #[error("FFT grid of size {size} is smaller than twice the support radius plus one ({required})")]
    GridTooSmall { size: usize, required: usize },

    #[error("Neumann series does not contract: |delta - a|_1 = {0}")]
    NotContractive(f64),

    #[error("Neumann series needs {needed} terms, more than the allowed {max_iter}")]
    MaxIterExceeded { needed: usize, max_iter: usize },

    #[error("Gabor system is not a frame: {0}")]
    NotAFrame(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotInvertible(_) | Error::NotAFrame(_) | Error::NotContractive(_) => 2,
            Error::TruncationNotConverged(_)
            | Error::MaxIterExceeded { .. }
            | Error::GridTooSmall { .. }
            | Error::OverlappingSupports(_) => 3,
            Error::DimensionMismatch { .. }
            | Error::InvalidParams(_)
            | Error::IndexOutOfRange(_)
            | Error::SizeMismatch(_)
            | Error::DeterminantTooLarge { .. }
            | Error::Malformed(_) => 4,
        }
    }
}
