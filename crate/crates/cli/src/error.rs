//! CLI error type carrying the process exit code.
//!
//! Exit codes: 0 ok, 1 usage, 2 data or validation error, 3 numeric failure.

use std::fmt;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 3,
        }
    }

    pub fn from_csv(e: csv::Error) -> Self {
        Self::data(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<hierop::Error> for CliError {
    fn from(e: hierop::Error) -> Self {
        let code = if e.is_numeric() {
            3
        } else if matches!(e, hierop::Error::UnknownName { .. }) {
            1
        } else {
            2
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}
