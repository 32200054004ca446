use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}, row {row}: {message}")]
    Validation { file: String, row: usize, message: String },

    #[error("invalid json in {file}: {message}")]
    Json { file: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("partition failed: {0}")]
    Partition(String),

    #[error("epoch {epoch}, task {task}: {source}")]
    Training {
        epoch: usize,
        task: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Process exit status for this error: 2 config/validation, 3 partition, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Partition(_) => 3,
            Error::Numerical(_) => 4,
            Error::Training { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub(crate) fn in_task(self, epoch: usize, task: usize) -> Self {
        match self {
            e @ Error::Training { .. } => e,
            e => Error::Training { epoch, task, source: Box::new(e) },
        }
    }
}
