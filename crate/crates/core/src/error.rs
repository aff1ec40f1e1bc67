use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. Positions are 1-based and count the header row.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// Data that parsed but violates a structural invariant.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// An argument outside an operation's domain.
    #[error("{0}")]
    Domain(String),

    /// Inputs that are individually valid but inconsistent with each other.
    #[error("mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
