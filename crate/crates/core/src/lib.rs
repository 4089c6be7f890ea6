//! Stochastic conjugate subgradient (SCS) solver for two-stage stochastic
//! programs with a quadratic first stage and linear or quadratic recourse,
//! together with reference solvers, an SMPS reader and an experiment
//! harness.

use std::path::Path;

use thiserror::Error;

pub mod baselines;
pub mod cli;
pub mod history;
pub mod instances;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scs;
pub mod smps;

/// Errors surfaced by the harness and the binary.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Smps(#[from] smps::SmpsError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Scs(#[from] scs::ScsError),
    #[error(transparent)]
    Baseline(#[from] baselines::BaselineError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error("solver not applicable to this instance: {0}")]
    UnsupportedSolverForInstance(String),
    #[error("configurations do not share instance and seed: {0}")]
    MismatchedInstances(String),
}

impl Error {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// True for problems with the input (instance or configuration) rather
    /// than with solving it.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Smps(_)
                | Error::Model(
                    model::ModelError::Parse { .. } | model::ModelError::InvalidData(_) | model::ModelError::DimensionMismatch { .. }
                )
                | Error::Config(_)
                | Error::InvalidConfig(_)
                | Error::MismatchedInstances(_)
        )
    }

    /// Process exit code: 2 for input errors, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_parse_error() {
            2
        } else {
            3
        }
    }
}
