use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("invalid split: {0}")]
    Split(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("architecture error at layer {layer} ({kind}): {message}")]
    Architecture {
        layer: usize,
        kind: &'static str,
        message: String,
    },

    #[error("input width mismatch: model expects {expected} features, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("invalid training config: {0}")]
    TrainConfig(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("invalid response matrix: {0}")]
    ResponseMatrix(String),

    #[error(
        "item {item} has identical responses from every respondent; add the artificial \
         respondents (random, optimistic, pessimistic) or waive the singularity guard"
    )]
    Singular { item: String },

    #[error("missing prediction for model {model} on instance {instance}")]
    MissingPrediction { model: String, instance: String },

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::Parse {
            line,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
