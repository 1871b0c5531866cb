//! Command implementations behind the `shiftknn` binary.
//!
//! Each command writes its report to the given writer and returns a
//! [`Failure`] carrying the process exit code on error: 1 for runtime
//! failures and violated checks, 2 for usage and configuration errors.

pub mod commands;
pub mod config;

use std::fmt;

pub use config::ExperimentConfig;

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            error: error.into(),
        }
    }

    /// Classifies a library error: bad parameters, unsupported inputs and
    /// degenerate grids are usage errors, everything else is a runtime
    /// failure.
    pub fn from_core(error: shiftknn::Error) -> Self {
        use shiftknn::Error as E;
        match error {
            E::InvalidParameter { .. }
            | E::Unsupported(_)
            | E::DegenerateGrid(_)
            | E::DimensionMismatch { .. }
            | E::ZeroDimension => Self::usage(error),
            other => Self::runtime(other),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult = Result<(), Failure>;
