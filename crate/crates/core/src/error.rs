//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::jets::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown function `{name}` at line {line}, column {col}")]
    UnknownFunction { name: String, line: usize, col: usize },

    #[error("unknown symbol `{name}` (declared coordinates: {declared})")]
    UnknownSymbol { name: String, declared: String },

    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{function} undefined at {value} (point {point:?})")]
    Domain {
        function: String,
        value: f64,
        point: Vec<f64>,
    },

    #[error("metric is singular at {point:?} (det = {det:e})")]
    Singular { point: Vec<f64>, det: f64 },

    #[error("conformal factor vanishes at {point:?}")]
    ConformalZero { point: Vec<f64> },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn from_jet(err: JetError, point: &[f64]) -> Self {
        match err {
            JetError::Domain { function, value } | JetError::NonFinite { function, value } => Error::Domain {
                function: function.to_string(),
                value,
                point: point.to_vec(),
            },
            JetError::IndexOutOfRange { index, dim } => {
                Error::DimensionMismatch(format!("coordinate index {index} out of range for dimension {dim}"))
            }
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
