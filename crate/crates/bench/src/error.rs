use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] distort_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("audit failed for {algorithm} at k={k}: row value {row} but a fresh oracle gives {fresh}")]
    Audit { algorithm: String, k: usize, row: f64, fresh: f64 },
}

pub type Result<T> = std::result::Result<T, BenchError>;
