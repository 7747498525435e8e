use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid word {0:?}: words are nonempty strings over {{X, Y}} of length at most {max}", max = crate::free_algebra::MAX_DEGREE)]
    InvalidWord(String),

    #[error("not a Lie element: grade {grade} deviates from its bracket projection by {deviation:e}")]
    NotLie { grade: usize, deviation: f64 },

    #[error("formal log needs unit coefficient 1, got {0}")]
    UnitCoefficient(Complex64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is singular")]
    Singular,

    #[error("eigenvalue {0} lies on the branch cut (-inf, 0]")]
    BranchCut(Complex64),

    #[error("grade recursion failed at grade {grade}: {detail}")]
    Recursion { grade: usize, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
