use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An update produced NaN or infinite weights.
    #[error("non-finite weights at step {step}")]
    Divergence { step: usize },

    #[error("weight space of dimension {0} is not supported (at most 2)")]
    UnsupportedDimension(usize),

    #[error("densities are defined on different grids")]
    GridMismatch,

    #[error("no snapshots available")]
    NoSnapshots,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
