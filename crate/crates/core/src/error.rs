//! Error type shared by all field operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {expected} vs {found}")]
    GridMismatch { expected: String, found: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("poisson solve needs a zero-mean right-hand side: |mean| = {mean:.3e} exceeds {bound:.3e}")]
    NonZeroMean { mean: f64, bound: f64 },

    #[error("mask keeps no samples")]
    EmptyMask,

    #[error("kmax = {kmax} too large for this grid (limit {limit})")]
    KmaxTooLarge { kmax: usize, limit: usize },

    #[error("degenerate mask: kept fraction {kept:.4} below required {required:.4}")]
    DegenerateMask { kept: f64, required: f64 },

    #[error("unknown kernel function `{0}`")]
    UnknownKernelFn(String),

    #[error("constraint `{name}` violated: residual {value:.3e} exceeds {limit:.3e}")]
    ConstraintViolated {
        name: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),

    #[error("need at least {required} {what}, got {got}")]
    TooFew {
        what: &'static str,
        required: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field contains non-finite samples")]
    NonFinite,

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn grid_mismatch(expected: impl std::fmt::Display, found: impl std::fmt::Display) -> Self {
        Error::GridMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
