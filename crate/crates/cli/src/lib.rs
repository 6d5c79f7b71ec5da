//! Driver crate: configuration, pipeline orchestration and artifact
//! emission for the kleinian-core library.

use std::fmt;

pub mod config;
pub mod pipeline;
pub mod ppm;
pub mod report;

/// Driver-level failure, carrying the exit-code split: validation and IO
/// problems exit 2, structural mathematical failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(std::io::Error),
    Core(kleinian_core::error::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Core(e) => {
                if e.is_structural() {
                    3
                } else {
                    2
                }
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<kleinian_core::error::Error> for CliError {
    fn from(e: kleinian_core::error::Error) -> Self {
        CliError::Core(e)
    }
}
