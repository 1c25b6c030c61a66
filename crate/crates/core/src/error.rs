//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state layout does not match symmetry spec: {0}")]
    LayoutMismatch(String),

    #[error("invalid symmetry spec: {0}")]
    InvalidSpec(String),

    #[error("singular velocity Hessian (reciprocal condition {rcond:.3e})")]
    SingularHessian { rcond: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("charge norm at t=0 is below 1e-14; use the zero-normalized variant")]
    ZeroNormalizer,

    #[error("trajectories are not on the same time grid")]
    GridMismatch,

    #[error("training aborted: {0}")]
    Training(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
