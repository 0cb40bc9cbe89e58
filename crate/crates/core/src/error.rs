use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("infeasible geometry: minimum distance {min_distance} m must be below cell radius {radius} m")]
    InfeasibleGeometry { min_distance: f64, radius: f64 },

    #[error("receive covariance is singular at {0} (is the noise variance zero?)")]
    SingularCovariance(String),

    #[error("bisection could not bracket the multiplier for {0}")]
    BisectionBracket(String),

    #[error("numerical inconsistency: {0}")]
    Numeric(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("schema mismatch in {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("no data: {0}")]
    NoData(String),

    #[error("unsupported realization container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Validation problems map to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. } | Error::ConfigParse(_) | Error::InfeasibleGeometry { .. }
        )
    }
}
