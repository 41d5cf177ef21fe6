use std::fmt;

use berw_core::Error;

/// Failure with its process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter values.
    Usage(String),
    /// Unreadable or malformed configuration file.
    Config(String),
    /// The same parameter given twice with different values.
    Conflict(String),
    /// Output could not be written.
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Config(_) => 3,
            Self::Conflict(_) => 4,
            Self::Io(_) => 5,
            Self::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Conflict(m) => write!(f, "conflicting parameters: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec { .. }
            | Error::InvalidParameter(_)
            | Error::OddBridge(_)
            | Error::TooManySteps { .. }
            | Error::EnumerationTooLarge { .. }
            | Error::InsufficientSamples { .. }
            | Error::SeriesTooShort { .. } => Self::Usage(e.to_string()),
            _ => Self::Internal(e.to_string()),
        }
    }
}
