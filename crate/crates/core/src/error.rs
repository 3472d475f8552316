use thiserror::Error;

/// Errors raised by the geometry, bound and congruence routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scale factor or warping function is not strictly positive.
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// A time beyond the window where the pointwise comparison holds.
    #[error("outside validity window: t = {t} exceeds n/|beta| = {limit}")]
    ValidityWindow { t: f64, limit: f64 },

    /// A required hypothesis (e.g. the energy condition) does not hold.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// A required per-cell field is missing.
    #[error("missing field: {0}")]
    MissingField(String),

    /// Malformed or inconsistent input, with the 1-based row where known.
    #[error("invalid input{}: {message}", row.map(|r| format!(" (row {r})")).unwrap_or_default())]
    Parse { row: Option<usize>, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(row: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse {
            row,
            message: msg.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
