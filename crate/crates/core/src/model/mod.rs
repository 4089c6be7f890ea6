//! Problem data, scenario sampling and the extensive-form ground truth.

mod extensive;
pub mod native;
mod problem;
mod scenario;

use thiserror::Error;

use crate::oracle::OracleError;

pub use extensive::{extensive_form, true_objective, DeterministicProgram, ExtensiveSolution};
pub use problem::{Marginal, RandomEntry, RandomPosition, ScenarioSpec, Stochastics, TwoStageProblem};
pub use scenario::{enumerate_support, Scenario, ScenarioData, ScenarioSampler, ScenarioSet, Stream, SUPPORT_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch { what: String, expected: String, found: String },
    #[error("{0} is not symmetric")]
    NotSymmetric(String),
    #[error("{0} is not positive definite")]
    NotPositiveDefinite(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("the scenario distribution has infinite support")]
    InfiniteSupport,
    #[error("support of {size} scenarios exceeds the limit of {limit}")]
    SupportTooLarge { size: u64, limit: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
