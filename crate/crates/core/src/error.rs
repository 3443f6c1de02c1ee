use thiserror::Error;

/// Errors raised by the numerical and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid, spec or parameter set violates its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// A sampled function has not decayed at the edges of its grid.
    #[error("windowing error: {0}")]
    Windowing(String),

    /// A width, peak or lobe could not be extracted from the data.
    #[error("extraction error: {0}")]
    Extraction(String),

    /// A statistical estimator is undefined for the given counts.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Measured rate at or beyond the dead-time limit `1/τ`.
    #[error("saturation error: {0}")]
    Saturation(String),

    /// A least-squares fit is degenerate or under-determined.
    #[error("fit error: {0}")]
    Fit(String),

    /// Malformed input text (CSV, event files, key=value records).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
