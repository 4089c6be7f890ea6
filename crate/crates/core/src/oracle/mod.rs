//! Second-stage solvers, recourse subgradients and sample-average
//! objectives.
//!
//! The LP engine is a dense revised simplex ([`simplex`]), the bound
//! constrained QP engine a primal active-set method ([`qp`]), and the
//! extensive-form QP fallback an interior-point method ([`ipm`]).

pub mod ipm;
pub mod qp;
pub mod recourse;
pub mod saa;
pub mod simplex;

use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError};

pub use ipm::{solve_convex_qp, IpmSolution};
pub use qp::solve_qp_bound;
pub use recourse::{closed_form_qq, solve_recourse, subgrad_ql, subgrad_qq, ClosedFormDual};
pub use saa::{Evaluation, Objective, SaaFunction};
pub use simplex::{solve_lp_with_bounds, solve_standard_lp, LpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("second-stage problem infeasible for scenario {scenario}")]
    RecourseInfeasible { scenario: usize },
    #[error("second-stage problem unbounded for scenario {scenario}")]
    RecourseUnbounded { scenario: usize },
    #[error("recourse matrix D does not have full row rank")]
    RankDeficientD,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl OracleError {
    /// Rewrites the scenario index carried by recourse errors.
    pub fn with_scenario(self, index: usize) -> Self {
        match self {
            OracleError::RecourseInfeasible { .. } => OracleError::RecourseInfeasible { scenario: index },
            OracleError::RecourseUnbounded { .. } => OracleError::RecourseUnbounded { scenario: index },
            other => other,
        }
    }
}

/// Optimal second-stage data.
#[derive(Debug, Clone, PartialEq)]
pub struct RecourseSolution {
    pub h: f64,
    pub y: Vec<f64>,
    /// Equality duals.
    pub pi: Vec<f64>,
    /// Multipliers of `y ≥ lower` (reduced costs for the LP).
    pub bound_duals: Vec<f64>,
    pub status: SolveStatus,
}

impl RecourseSolution {
    pub fn failed(status: SolveStatus, n: usize, m: usize) -> Self {
        Self {
            h: match status {
                SolveStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            y: vec![0.0; n],
            pi: vec![0.0; m],
            bound_duals: vec![0.0; n],
            status,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// `min costᵀy s.t. D y = rhs, y ≥ 0`. Infeasibility and unboundedness
/// are reported through `status`.
pub fn solve_lp(cost: &[f64], d: &DenseMatrix, rhs: &[f64]) -> Result<RecourseSolution, OracleError> {
    let lp = solve_standard_lp(cost, d, rhs, None)?;
    Ok(from_lp(lp))
}

pub(crate) fn from_lp(lp: LpSolution) -> RecourseSolution {
    RecourseSolution { h: lp.value, y: lp.x, pi: lp.duals, bound_duals: lp.reduced_costs, status: lp.status }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_lp() {
        let d = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let s = solve_lp(&[1.0], &d, &[1.0]).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.h - 1.0).abs() < 1e-14 && (s.y[0] - 1.0).abs() < 1e-14 && (s.pi[0] - 1.0).abs() < 1e-14);
        let s = solve_lp(&[1.0], &d, &[-1.0]).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }
}
