//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KseError {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("profile not spectrally resolved: {0}")]
    UnresolvedProfile(String),

    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("refinement required: {0}")]
    RefinementNeeded(String),

    #[error("invalid config: key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("blow-up detected at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("audit refused: {0}")]
    AuditRefused(String),

    #[error("fit refused: {0}")]
    FitRefused(String),

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KseError>;
