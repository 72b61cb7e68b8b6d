use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (spectral deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("subsystem index {index} out of range for {n} subsystems")]
    BadIndex { index: usize, n: usize },

    #[error("invalid bipartition: {0}")]
    BadPartition(String),

    #[error("coupling strength must satisfy 0 <= epsilon < 1, got {0}")]
    BadEpsilon(f64),

    #[error("mixing parameter must be non-negative and finite, got {0}")]
    BadAlpha(f64),

    #[error("invalid evolution mode: {0}")]
    BadMode(String),

    #[error("expected subsystem dimensions {expected:?}, got {got:?}")]
    BadDims {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("states are not orthogonal (overlap {overlap:.3e})")]
    NotOrthogonal { overlap: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
