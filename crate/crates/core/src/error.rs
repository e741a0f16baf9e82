use thiserror::Error;

use crate::field::FieldError;

/// Errors shared across the crate. The CLI maps them onto exit codes with
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 1 for bad input, 2 for infeasible requests, 3 for broken invariants.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parse { .. } | Error::InvalidGraph(_) | Error::Config(_) | Error::Io(_) => 1,
            Error::Infeasible(_) => 2,
            Error::Field(FieldError::NoTriplets(_)) => 2,
            Error::Field(_) | Error::Protocol(_) | Error::Assertion(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
