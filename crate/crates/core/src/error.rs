//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("column '{0}' not found in header")]
    MissingColumn(String),

    #[error("target column '{column}': {detail}")]
    TargetNotBinary { column: String, detail: String },

    #[error("column '{column}', row {row}: cannot parse '{value}' as a number and it is not a declared missing token")]
    UnparseableNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("target has a single class")]
    SingleClassTarget,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("vocabulary of size {size} exceeds the limit {limit} for this operation")]
    VocabularyTooLarge { size: usize, limit: usize },

    #[error("cannot parse formula: {0}")]
    FormulaParse(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

impl Error {
    /// True for errors caused by configuration or parameters rather than
    /// by the data itself. The CLI maps these to a distinct exit code.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::MissingColumn(_)
                | Error::InvalidParam(_)
                | Error::VocabularyTooLarge { .. }
                | Error::FormulaParse(_)
        )
    }
}
