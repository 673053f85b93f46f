use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: column `{column}`: {reason}")]
    Schema { column: String, reason: String },

    #[error("parse error at row {row}, column `{column}`: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("out of range: requested {requested}, available {available}")]
    Range { requested: usize, available: usize },

    #[error("collinear design: column `{column}` is a linear combination of earlier columns")]
    RankDeficient { column: String },

    #[error("rejection constant {c:.3e} exceeds limit {limit:.1e}; use the iterative resampler")]
    RejectionConstant { c: f64, limit: f64 },

    #[error("resampling failed: {reason} (best KS distance {best_ks:.4}, survivors {survivors})")]
    Resample {
        reason: String,
        best_ks: f64,
        survivors: usize,
    },

    #[error("replication {replication} (seed {seed}) failed: {source}")]
    Replication {
        replication: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("missing inputs: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingFiles(Vec<PathBuf>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}
