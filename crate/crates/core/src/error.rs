use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("line {line}: unknown label {label:?} (expected negative, neutral or positive)")]
    UnknownLabel { line: usize, label: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("target {target:?} occurs neither as $T$ nor verbatim in tweet {tweet:?}")]
    MissingTarget { tweet: String, target: String },

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("no region features for region {region_id:?} of image {image_id:?}")]
    FeatureLookup { image_id: String, region_id: String },

    #[error("sequence needs at least {required} tokens for tweet and frame but the budget is {n_max}")]
    Capacity { required: usize, n_max: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("training diverged at step {step}: loss = {loss}")]
    Divergence { step: usize, loss: f64 },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse grouping used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Config,
    Data,
    Runtime,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::Config(_) => ErrorFamily::Config,
            Error::Parse { .. }
            | Error::UnknownLabel { .. }
            | Error::Validation(_)
            | Error::MissingTarget { .. }
            | Error::Ingestion(_)
            | Error::FeatureLookup { .. } => ErrorFamily::Data,
            Error::Capacity { .. }
            | Error::Contract(_)
            | Error::Divergence { .. }
            | Error::Checkpoint(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorFamily::Runtime,
        }
    }
}
