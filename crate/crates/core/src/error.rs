use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("span labeling tasks are unsupported by the simulator; the dataset uses the span schema")]
    SpanTaskUnsupported,

    #[error("document id {0} is not part of the training pool")]
    UnknownId(u64),

    #[error("document id {0} is already labeled")]
    AlreadyLabeled(u64),

    #[error("document id {0} appears more than once in the batch")]
    DuplicateId(u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite loss at training step {step}, batch {batch}")]
    NonFiniteLoss { step: u64, batch: usize },

    #[error("corrupt artifact {name}: {message}")]
    CorruptArtifact { name: String, message: String },

    #[error("missing artifact {0}")]
    MissingArtifact(String),

    #[error("run store error: {0}")]
    Store(String),

    #[error("unknown run id {0}")]
    UnknownRun(String),

    #[error("run {run_id} is not successful (status: {status})")]
    RunNotSuccessful { run_id: String, status: String },

    #[error("fingerprint mismatch for run {run_id}: stored {stored}, config gives {actual}")]
    FingerprintMismatch {
        run_id: String,
        stored: String,
        actual: String,
    },

    #[error("curves cannot be aligned by labeled count; offending seeds: {seeds:?}")]
    Alignment { seeds: Vec<u64> },

    #[error("nothing to aggregate")]
    EmptyAggregate,

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("seed run {seed} paused after step {step}")]
    Paused { seed: u64, step: usize },

    #[error("seed run {seed} was interrupted")]
    Interrupted { seed: u64 },

    #[error("seed runs failed: {0:?}")]
    SeedRunsFailed(Vec<u64>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 for configuration/validation problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation { .. } | Error::UnknownStrategy(_) => 2,
            _ => 1,
        }
    }
}
