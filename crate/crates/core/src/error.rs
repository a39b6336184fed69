use thiserror::Error;

/// Errors raised by the exact-distribution library.
#[derive(Debug, Error)]
pub enum Error {
    /// Partitions of different weight were compared.
    #[error("invalid comparison: partitions {left} and {right} have different weights")]
    InvalidComparison { left: String, right: String },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A gamma-function pole that is not cancelled by a matching pole.
    #[error("unpaired gamma pole at argument {argument}")]
    Pole { argument: f64 },

    /// The requested probability is not bracketed by the CDF values.
    #[error("bracket error: probability {prob} outside [{lo}, {hi}]")]
    Bracket { prob: f64, lo: f64, hi: f64 },

    /// The requested representation does not exist for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A matrix decomposition failed.
    #[error("decomposition error: {0}")]
    Decomposition(String),

    /// A persisted coefficient table is malformed or inconsistent.
    #[error("corrupt cache file {path}: {reason}")]
    Cache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
