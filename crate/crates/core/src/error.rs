use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty cohort")]
    EmptyCohort,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("dimension {dim} is too large for the exact solver (max {max}); use meb_coreset")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("cohort `{word}` has {available} points, {needed} required")]
    InsufficientPoints {
        word: String,
        needed: usize,
        available: usize,
    },

    #[error("undefined correlation: {0} has zero variance")]
    ZeroVariance(&'static str),

    #[error("arc undefined at origin")]
    ArcUndefined,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need ≥2 classes")]
    TooFewClasses,

    #[error("missing entry for `{0}`")]
    Missing(String),

    #[error("not enough words: {required} required, {available} available")]
    InsufficientWords { required: usize, available: usize },

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("truncated record at byte offset {offset}")]
    Truncated { offset: u64 },

    #[error("malformed record at byte offset {offset}: {message}")]
    Corrupt { offset: u64, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that signal a broken invariant rather than bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
