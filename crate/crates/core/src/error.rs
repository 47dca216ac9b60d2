use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A data row failed validation. `line` is 1-based and counts the header.
    #[error("{file} line {line}: field `{field}`: {message}")]
    Row {
        file: String,
        line: u64,
        field: &'static str,
        message: String,
    },

    #[error("{file}: expected header `{expected}`, found `{found}`")]
    Header {
        file: String,
        expected: String,
        found: String,
    },

    #[error("invalid cohort: {0}")]
    Cohort(String),

    #[error("group {group} is degenerate: no student submitted anything to it")]
    DegenerateGroup { group: usize },

    #[error("pattern parse error at byte {position}: {message}")]
    PatternParse { position: usize, message: String },

    #[error("invalid pattern: {0}")]
    Pattern(String),

    #[error("sequence kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("synthetic generation failed: {0}")]
    Synth(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
