//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by matrix construction, spectral analysis, fusion and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// The matrix has no nonzero entry, so its spectrum is undefined.
    #[error("matrix is identically zero; spectral quantities are undefined")]
    ZeroMatrix,

    /// A value was NaN or infinite where a finite number is required.
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// Two operands do not have compatible shapes.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    /// An index or count is outside its valid range.
    #[error("{what} = {got} out of range [{min}, {max}]")]
    IndexOutOfRange {
        what: &'static str,
        got: usize,
        min: usize,
        max: usize,
    },

    /// A scalar argument violates its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A blend coefficient lies outside [0, 1].
    #[error("blend coefficient for channel {channel} is {value}; must lie in [0, 1]")]
    InvalidAlpha { channel: usize, value: f64 },

    /// A prescribed singular-value list is not admissible.
    #[error("invalid spectrum prescription: {0}")]
    InvalidSpectrum(String),

    /// The generator could not satisfy its constraints within the retry budget.
    #[error("infeasible construction: {0}")]
    InfeasibleConstruction(String),

    /// A matrix file could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            got: format!("{}x{}", got.0, got.1),
        }
    }
}
