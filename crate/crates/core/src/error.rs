use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("electrode {0} is not present in the recording")]
    MissingElectrode(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("signal too short: {len} samples, need at least {needed}")]
    SignalTooShort { len: usize, needed: usize },

    #[error("range {start}..{end} out of bounds for length {len}")]
    OutOfRange { start: usize, end: usize, len: usize },

    #[error("too few feature windows: {have}, need at least {needed}")]
    TooFewWindows { have: usize, needed: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training windows mix both classes")]
    MixedClassTraining,

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("score list is empty")]
    EmptyScores,

    #[error("F-score undefined: tp = fp = fn = 0")]
    UndefinedFScore,

    #[error("need at least {needed} recordings, got {have}")]
    TooFewRecordings { have: usize, needed: usize },

    #[error("reference set-up {0} missing from report")]
    MissingReference(String),

    #[error("unknown set-up {0}")]
    UnknownSetUp(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    /// True for errors caused by bad user input (files, configs, names)
    /// rather than an internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NonFiniteLoss { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
