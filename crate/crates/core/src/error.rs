use thiserror::Error;

/// Errors produced anywhere in the selection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Delimited input could not be turned into a table. `row` is the
    /// 1-based data row; a header line is not counted.
    #[error("ingest error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Ingest { row: Option<usize>, message: String },

    #[error("no such column: {0}")]
    NoSuchColumn(String),

    #[error("column {column} is not part of the influence universe")]
    NotInUniverse { column: String },

    /// A metric was requested on a table for which it has no value (zero rows).
    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("invalid classification rules: {0}")]
    InvalidRules(String),

    #[error("invalid assessment form: {0}")]
    InvalidForm(String),

    #[error("invalid threshold {0}: must lie in [0, 2]")]
    InvalidThreshold(f64),

    /// Scores and classification passed together do not describe the same table.
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("invalid synthetic table spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn ingest(row: Option<usize>, message: impl Into<String>) -> Self {
        Error::Ingest {
            row,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
