use crate::linalg::DenseMatrix;
use crate::oracle::recourse::solve_recourse;
use crate::oracle::{solve_convex_qp, solve_lp_with_bounds, OracleError, SolveStatus};

use super::{ModelError, ScenarioSet, TwoStageProblem};

/// Deterministic equivalent over a finite scenario set, in variables
/// `z = (x, y₁, …, y_N)`:
///
/// ```text
/// min ½zᵀHz + fᵀz + constant   s.t. E z = e, z ≥ lower
/// ```
///
/// `hessian` is `None` when the program is linear.
#[derive(Debug, Clone)]
pub struct DeterministicProgram {
    pub n_first: usize,
    pub n_second: usize,
    pub num_scenarios: usize,
    pub hessian: Option<DenseMatrix>,
    pub cost: Vec<f64>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct ExtensiveSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Second-stage decisions, one block per scenario.
    pub y: Vec<Vec<f64>>,
}

pub fn extensive_form(problem: &TwoStageProblem, scenarios: &ScenarioSet) -> Result<DeterministicProgram, ModelError> {
    problem.validate()?;
    let (n1, n2, m1, m2) = (problem.n1(), problem.n2(), problem.m1(), problem.m2());
    let ns = scenarios.len();
    for s in scenarios.iter() {
        if s.xi().len() != m2 || s.tech().rows() != m2 || s.tech().cols() != n1 {
            return Err(ModelError::DimensionMismatch {
                what: "scenario".into(),
                expected: format!("xi of length {m2}, C of size {m2}x{n1}"),
                found: format!("xi of length {}, C of size {}x{}", s.xi().len(), s.tech().rows(), s.tech().cols()),
            });
        }
    }
    let nz = n1 + ns * n2;
    let rows = m1 + ns * m2;

    let quadratic = !problem.q.is_zero() || problem.p.is_some();
    let hessian = quadratic.then(|| {
        let mut h = DenseMatrix::zeros(nz, nz);
        for i in 0..n1 {
            for j in 0..n1 {
                h[(i, j)] = problem.q[(i, j)];
            }
        }
        if let Some(p) = &problem.p {
            for (k, s) in scenarios.iter().enumerate() {
                let off = n1 + k * n2;
                for i in 0..n2 {
                    for j in 0..n2 {
                        h[(off + i, off + j)] = s.weight * p[(i, j)];
                    }
                }
            }
        }
        h
    });

    let mut cost = problem.c.clone();
    for s in scenarios.iter() {
        cost.extend(problem.d.iter().map(|v| s.weight * v));
    }

    let mut e = DenseMatrix::zeros(rows, nz);
    let mut rhs = Vec::with_capacity(rows);
    for i in 0..m1 {
        for j in 0..n1 {
            e[(i, j)] = problem.a[(i, j)];
        }
        rhs.push(problem.b[i]);
    }
    for (k, s) in scenarios.iter().enumerate() {
        let row0 = m1 + k * m2;
        let col0 = n1 + k * n2;
        for i in 0..m2 {
            for j in 0..n1 {
                e[(row0 + i, j)] = s.tech()[(i, j)];
            }
            for j in 0..n2 {
                e[(row0 + i, col0 + j)] = problem.d_mat[(i, j)];
            }
            rhs.push(s.xi()[i]);
        }
    }

    let mut lower = problem.lower_or_free();
    lower.extend(std::iter::repeat_n(0.0, ns * n2));

    Ok(DeterministicProgram {
        n_first: n1,
        n_second: n2,
        num_scenarios: ns,
        hessian,
        cost,
        eq_matrix: e,
        eq_rhs: rhs,
        lower,
        constant: problem.constant,
    })
}

impl DeterministicProgram {
    /// Solves with the simplex method (linear case) or the interior-point
    /// method (quadratic case).
    pub fn solve(&self) -> Result<ExtensiveSolution, OracleError> {
        let z = match &self.hessian {
            None => {
                let lp = solve_lp_with_bounds(&self.cost, &self.eq_matrix, &self.eq_rhs, &self.lower)?;
                match lp.status {
                    SolveStatus::Optimal => lp.x,
                    SolveStatus::Infeasible => return Err(OracleError::RecourseInfeasible { scenario: 0 }),
                    SolveStatus::Unbounded => return Err(OracleError::RecourseUnbounded { scenario: 0 }),
                }
            }
            Some(h) => solve_convex_qp(Some(h), &self.cost, &self.eq_matrix, &self.eq_rhs, &self.lower)?.z,
        };
        Ok(self.unpack(z))
    }

    /// Solves the linear case with the interior-point method; used to
    /// cross-check the two engines.
    pub fn solve_interior(&self) -> Result<ExtensiveSolution, OracleError> {
        let sol = solve_convex_qp(self.hessian.as_ref(), &self.cost, &self.eq_matrix, &self.eq_rhs, &self.lower)?;
        Ok(self.unpack(sol.z))
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        let quad = self.hessian.as_ref().map_or(0.0, |h| 0.5 * crate::linalg::dot(z, &h.mul_vec(z)));
        quad + crate::linalg::dot(&self.cost, z) + self.constant
    }

    fn unpack(&self, z: Vec<f64>) -> ExtensiveSolution {
        let value = self.objective(&z);
        let x = z[..self.n_first].to_vec();
        let y =
            (0..self.num_scenarios).map(|k| z[self.n_first + k * self.n_second..self.n_first + (k + 1) * self.n_second].to_vec()).collect();
        ExtensiveSolution { value, x, y }
    }
}

/// `c(x) + Σ wᵢ h(x, ωᵢ)`, one independent second-stage solve per scenario.
pub fn true_objective(problem: &TwoStageProblem, scenarios: &ScenarioSet, x: &[f64]) -> Result<f64, OracleError> {
    let mut total = 0.0;
    for (i, s) in scenarios.iter().enumerate() {
        let (sol, _) = solve_recourse(problem, x, &s.data, None).map_err(|e| e.with_scenario(i))?;
        total += s.weight * sol.h;
    }
    Ok(problem.first_stage_value(x) + total)
}
