use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inequality measure or moment does not exist for these parameters.
    #[error("undefined measure: {0}")]
    UndefinedMeasure(String),

    /// No observations survived filtering, or an empty sample was supplied.
    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("row {row}, column '{column}': cannot parse '{value}' ({reason})")]
    Parse {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("fit failed: {message}")]
    FitFailure {
        message: String,
        diagnostics: Vec<crate::estimation::StartDiagnostic>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
