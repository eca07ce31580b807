//! Command-line driver: parse problem files, run factorizations and
//! certificates, verify every result independently, and report as JSON.
//!
//! Exit codes: 0 ok, 2 parse/input, 3 math-contract violation,
//! 4 verification failure.

pub mod certfile;
pub mod commands;
pub mod problem;
pub mod report;
pub mod value;
pub mod verify;

use std::fmt;

/// Errors at the CLI boundary, carrying their exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Math(transvect::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Math(e) => {
                if e.is_verification() {
                    4
                } else {
                    3
                }
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<transvect::Error> for CliError {
    fn from(e: transvect::Error) -> Self {
        CliError::Math(e)
    }
}
