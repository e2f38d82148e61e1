use thiserror::Error;

/// Errors raised by the laboratory.
///
/// The variants map onto the CLI exit statuses: numerical failures exit with
/// status 3, everything caused by bad input exits with status 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("model validity: {0}")]
    ModelValidity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

/// Message used whenever a density fails the zero-fiber-integral requirement.
pub const CONDITION_GENERAL_FIBERS: &str = "Condition \"integrability on general fibers\"";
