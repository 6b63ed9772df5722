use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing mandatory column \"{0}\"")]
    MissingColumn(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("file contains no data rows: {}", .0.display())]
    EmptyFile(PathBuf),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("column \"{0}\" is constant and cannot be scaled")]
    ConstantColumn(String),

    #[error("scaler must be fitted before it is applied or inverted")]
    NotFitted,

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("timestamp {0} is outside the supported 1950-2050 window")]
    TimestampOutOfRange(chrono::NaiveDateTime),

    #[error("solver did not converge: {0}")]
    Convergence(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model trained for the {model} season cannot evaluate {data} data (use force to override)")]
    SeasonMismatch { model: String, data: String },

    #[error("series are misaligned: {0}")]
    Misaligned(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Model,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn stage(stage: impl Into<String>, source: Error) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(source),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Stage { source, .. } => source.kind(),
            Error::Config(_) | Error::NotFitted | Error::SeasonMismatch { .. } => ErrorKind::Usage,
            Error::Convergence(_) | Error::ModelFormat(_) => ErrorKind::Model,
            _ => ErrorKind::Data,
        }
    }
}
