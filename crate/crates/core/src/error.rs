use thiserror::Error;

/// Error type shared by every module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or dataset entry is NaN or infinite (0-based coordinates).
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// Non-finite coordinates appeared while condensing; signals a
    /// normalization bug and must never occur on valid input.
    #[error("non-finite coordinate produced at iteration {iteration} (row {row}, column {col})")]
    NonFiniteAtIteration {
        iteration: usize,
        row: usize,
        col: usize,
    },

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Matrix or vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input carries no usable variation (e.g. all points identical).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A text cell failed numeric parsing (1-based file coordinates).
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    /// Underlying file-system failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
