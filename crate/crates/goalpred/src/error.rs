//! Crate-wide error type and result alias.

use std::path::PathBuf;

/// Errors produced by dataset ingestion, feature extraction, training and
/// evaluation. Variants are grouped by what went wrong rather than where,
/// so the CLI can map them onto stable exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A segment violated a documented invariant. `segment` is the 0-based
    /// index in file order.
    #[error("segment {segment}, field `{field}`: {message}")]
    Segment {
        segment: usize,
        field: &'static str,
        message: String,
    },

    /// Data-level invariant violation not tied to a single segment.
    #[error("invalid data: {0}")]
    Invalid(String),

    /// Caller-supplied configuration was rejected before any work started.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Model container problems: bad magic, unsupported version, corrupt body.
    #[error("model file error: {0}")]
    Model(String),

    /// Numeric failure during training or evaluation (non-finite loss, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
