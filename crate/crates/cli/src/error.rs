use std::fmt;

use ddos_elm::{Error, ErrorKind};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    /// Library failure, prefixed with the pipeline stage it came from.
    pub fn from_lib(err: Error) -> Self {
        let code = match err.kind() {
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
        Self {
            code,
            message: format!("{}: {err}", stage(&err)),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        Self::from_lib(err)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn stage(err: &Error) -> &'static str {
    match err {
        Error::Io { .. } | Error::EmptyFile(_) | Error::Parse { .. } | Error::Schema(_) => "load",
        Error::EmptyDataset(_) => "clean",
        Error::Stratification(_) => "split",
        Error::EmptySelection { .. } => "feature selection",
        Error::Validation(_) => "preprocess",
        Error::Shape { .. } | Error::Numeric(_) => "fit",
        Error::UnsupportedVersion { .. } | Error::Integrity(_) => "model",
    }
}
