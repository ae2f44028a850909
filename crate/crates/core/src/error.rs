use std::path::PathBuf;

use crate::types::ClassId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("format error at line {line}: {message}")]
    Format { line: u64, message: String },

    #[error("invalid value at row {row}: {message}")]
    Value { row: u64, message: String },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("duplicate sample_id {0}")]
    DuplicateId(u64),

    #[error("class {class} has {available} samples, {required} required")]
    Capacity {
        class: ClassId,
        required: usize,
        available: usize,
    },

    #[error("store has {available} classes, {required} required")]
    InsufficientClasses { required: usize, available: usize },

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm vector under cosine metric")]
    DegenerateVector,

    #[error("degenerate statistic: {0}")]
    DegenerateStat(String),

    #[error("unknown class {0}")]
    UnknownClass(ClassId),

    #[error("diagnostic unsupported: {0}")]
    UnsupportedDiagnostic(&'static str),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

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

    #[error("json: {0}")]
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
