//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsoError {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Evaluation requested at a coordinate pole where the formula is singular.
    #[error("pole error: {0}")]
    Pole(String),
    /// A quantum-number combination rejected by the lowest-weight criterion.
    #[error("criterion error: {0}")]
    Criterion(String),
    /// Radial-system compatibility constraint violated.
    #[error("incompatible system: {0}")]
    Incompatible(String),
    /// Wrong radial-system case for the requested reduction.
    #[error("case error: {0}")]
    Case(String),
    /// Gauge or tetrad tags do not match.
    #[error("frame error: {0}")]
    Frame(String),
    /// ODE integration failed.
    #[error("integration error: {0}")]
    Integration(String),
    /// Textual input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// Input/output failure.
    #[error("io error: {0}")]
    Io(String),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, IsoError>;

impl From<std::io::Error> for IsoError {
    fn from(e: std::io::Error) -> Self {
        IsoError::Io(e.to_string())
    }
}

impl From<csv::Error> for IsoError {
    fn from(e: csv::Error) -> Self {
        IsoError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for IsoError {
    fn from(e: serde_json::Error) -> Self {
        IsoError::Io(e.to_string())
    }
}
