//! Library surface of the command-line driver: command implementations and
//! the acceptance verification suite.

pub mod commands;
pub mod config;
pub mod mapio;
pub mod report;
pub mod verify;

use std::fmt;

/// Command errors, mapped onto process exit codes: domain/numerical errors
/// exit 1, I/O and serialization errors exit 2.
#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<sphere_domain::DomainError> for CliError {
    fn from(e: sphere_domain::DomainError) -> CliError {
        match e {
            sphere_domain::DomainError::InvalidSerialization(m) => CliError::Io(m),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<functionals::FunctionalError> for CliError {
    fn from(e: functionals::FunctionalError) -> CliError {
        CliError::Domain(e.to_string())
    }
}

impl From<quadratics::QuadraticsError> for CliError {
    fn from(e: quadratics::QuadraticsError) -> CliError {
        CliError::Domain(e.to_string())
    }
}

impl From<fitting::FittingError> for CliError {
    fn from(e: fitting::FittingError) -> CliError {
        CliError::Domain(e.to_string())
    }
}

impl From<moebius::MoebiusError> for CliError {
    fn from(e: moebius::MoebiusError) -> CliError {
        CliError::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}
