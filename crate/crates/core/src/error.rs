use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not square-free")]
    NotSquarefree(u64),

    #[error("expected an integer greater than 1, got {0}")]
    TooSmall(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient index {index} outside 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("line {line}: malformed row: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: field `{field}` failed validation: {message}")]
    Validation {
        line: u64,
        field: String,
        message: String,
    },

    #[error("unsupported dataset format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checksum mismatch for {}", path.display())]
    Checksum { path: PathBuf },

    #[error("corrupt coefficient file: {0}")]
    CorruptCoefficients(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
