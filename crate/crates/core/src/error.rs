use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: found {found} of {requested} valid positions after {attempts} attempts")]
    Infeasible {
        requested: usize,
        found: usize,
        attempts: usize,
    },

    #[error("checkpoint version mismatch: expected {expected}, found {found}")]
    CheckpointVersion { expected: String, found: String },

    #[error("corrupted checkpoint: {0}")]
    CorruptedCheckpoint(String),

    #[error("checkpoint is missing tensor `{0}`")]
    MissingTensor(String),

    #[error(
        "non-finite loss at epoch {epoch}, step {step}: loss_d={loss_d}, loss_g={loss_g}"
    )]
    NonFiniteLoss {
        epoch: usize,
        step: usize,
        loss_d: f64,
        loss_g: f64,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
