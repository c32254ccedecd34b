use thiserror::Error;

/// Errors produced by grid construction, operators, solvers and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid dimension must be 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("modes per axis must be an even integer >= 8, got {0}")]
    BadModes(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blow-up: |u|_inf = {sup:.6e} exceeded threshold {threshold:.6e} at t = {t:.6e}")]
    BlowUp { t: f64, sup: f64, threshold: f64 },

    #[error("Picard iteration is not contracting (iterate sup-norm differences: {0:?})")]
    PicardDiverged(Vec<f64>),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
