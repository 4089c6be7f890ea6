//! Per-scenario recourse evaluation and subgradients.
//!
//! Both the linear and the quadratic second stage use the equality duals:
//! since `h` depends on `x` only through `r = ξ − C x`, a dual solution `π`
//! gives the subgradient `−Cᵀπ`.

use crate::linalg::{dot, norm_inf, spectral_map as spectral, Cholesky, DenseMatrix};
use crate::model::{Scenario, ScenarioData, TwoStageProblem};

use super::simplex::solve_standard_lp;
use super::{from_lp, solve_qp_bound, OracleError, RecourseSolution, SolveStatus};

/// `ξ − C x`.
pub fn recourse_rhs(data: &ScenarioData, x: &[f64]) -> Vec<f64> {
    let cx = data.tech.mul_vec(x);
    data.xi.iter().zip(&cx).map(|(a, b)| a - b).collect()
}

/// Solves the second stage at `x`, warm-starting the LP from `warm` when
/// given. Returns the solution and the final basis (empty for QPs).
///
/// A non-optimal status is turned into `RecourseInfeasible` or
/// `RecourseUnbounded` with scenario index 0; callers re-index.
pub fn solve_recourse(
    problem: &TwoStageProblem,
    x: &[f64],
    data: &ScenarioData,
    warm: Option<&[usize]>,
) -> Result<(RecourseSolution, Vec<usize>), OracleError> {
    if x.len() != problem.n1() {
        return Err(OracleError::DimensionMismatch { expected: problem.n1(), found: x.len() });
    }
    let rhs = recourse_rhs(data, x);
    let (sol, basis) = match &problem.p {
        None => {
            let lp = solve_standard_lp(&problem.d, &problem.d_mat, &rhs, warm)?;
            let basis = lp.basis.clone();
            (from_lp(lp), basis)
        }
        Some(p) => {
            let lower = vec![0.0; problem.n2()];
            (solve_qp_bound(p, &problem.d, &problem.d_mat, &rhs, &lower)?, Vec::new())
        }
    };
    match sol.status {
        SolveStatus::Optimal => Ok((sol, basis)),
        SolveStatus::Infeasible => Err(OracleError::RecourseInfeasible { scenario: 0 }),
        SolveStatus::Unbounded => Err(OracleError::RecourseUnbounded { scenario: 0 }),
    }
}

/// `−C(ω)ᵀπ`.
pub fn recourse_subgradient(data: &ScenarioData, pi: &[f64]) -> Vec<f64> {
    data.tech.tr_mul_vec(pi).iter().map(|v| -v).collect()
}

/// Linear recourse value and subgradient `v = −C(ω)ᵀπ*`.
pub fn subgrad_ql(problem: &TwoStageProblem, x: &[f64], scenario: &Scenario) -> Result<(f64, Vec<f64>), OracleError> {
    let rhs = recourse_rhs(&scenario.data, x);
    let lp = solve_standard_lp(&problem.d, &problem.d_mat, &rhs, None)?;
    match lp.status {
        SolveStatus::Optimal => Ok((lp.value, recourse_subgradient(&scenario.data, &lp.duals))),
        SolveStatus::Infeasible => Err(OracleError::RecourseInfeasible { scenario: 0 }),
        SolveStatus::Unbounded => Err(OracleError::RecourseUnbounded { scenario: 0 }),
    }
}

/// Quadratic recourse value and subgradient from the primal active-set
/// solve.
pub fn subgrad_qq(problem: &TwoStageProblem, x: &[f64], scenario: &Scenario) -> Result<(f64, Vec<f64>), OracleError> {
    let p = problem.p.as_ref().ok_or_else(|| OracleError::NumericalBreakdown("problem has no quadratic recourse term".into()))?;
    let rhs = recourse_rhs(&scenario.data, x);
    let sol = solve_qp_bound(p, &problem.d, &problem.d_mat, &rhs, &vec![0.0; problem.n2()])?;
    match sol.status {
        SolveStatus::Optimal => Ok((sol.h, recourse_subgradient(&scenario.data, &sol.pi))),
        SolveStatus::Infeasible => Err(OracleError::RecourseInfeasible { scenario: 0 }),
        SolveStatus::Unbounded => Err(OracleError::RecourseUnbounded { scenario: 0 }),
    }
}

/// Dual solution of the quadratic recourse problem in closed form.
#[derive(Debug, Clone)]
pub struct ClosedFormDual {
    pub h: f64,
    pub pi: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub subgradient: Vec<f64>,
}

/// Closed-form dual of
/// `min ½yᵀPy + dᵀy s.t. D y = r, y ≥ 0`:
/// with `M = D P^{-1/2}`, `Π = I − Mᵀ(MMᵀ)⁻¹M`, `H = P^{-1/2} Π P^{-1/2}`,
/// `u₀ = P^{-1/2}Mᵀ(MMᵀ)⁻¹r` and `e = H d − u₀`, the dual is
/// `max_{s≥0} −½sᵀHs + eᵀs + κ` with
/// `κ = −½dᵀHd + dᵀu₀ + ½rᵀ(MMᵀ)⁻¹r`.
///
/// The candidate `s = max(0, H⁺e)` is returned only when it satisfies the
/// dual optimality conditions (`None` otherwise). `H` is singular in
/// general, so this is a cross-check rather than a solver.
pub fn closed_form_qq(problem: &TwoStageProblem, x: &[f64], data: &ScenarioData) -> Result<Option<ClosedFormDual>, OracleError> {
    let p = problem.p.as_ref().ok_or_else(|| OracleError::NumericalBreakdown("problem has no quadratic recourse term".into()))?;
    let n2 = problem.n2();
    let d = &problem.d;
    let r = recourse_rhs(data, x);

    let p_inv_half = spectral(p, |l, _| 1.0 / l.max(f64::MIN_POSITIVE).sqrt());
    // ‖H‖ ≤ ‖P⁻¹‖; eigenvalues of H below this scale are treated as zero.
    let h_zero = 1e-10 * p_inv_half.max_abs().powi(2).max(f64::MIN_POSITIVE);
    let m = problem.d_mat.matmul(&p_inv_half);
    let mmt = m.matmul(&m.transpose());
    let chol = Cholesky::new(&mmt).map_err(|_| OracleError::RankDeficientD)?;
    let mmt_scale = mmt.max_abs();
    let min_pivot = (0..mmt.rows()).map(|i| chol.factor()[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot * min_pivot <= 1e-12 * mmt_scale {
        return Err(OracleError::RankDeficientD);
    }

    // Π = I − Mᵀ(MMᵀ)⁻¹M, column by column.
    let mut proj = DenseMatrix::identity(n2);
    for j in 0..n2 {
        let w = chol.solve(&m.column(j));
        let col = m.tr_mul_vec(&w);
        for i in 0..n2 {
            proj[(i, j)] -= col[i];
        }
    }
    let h_mat = p_inv_half.matmul(&proj).matmul(&p_inv_half);
    let mmt_inv_r = chol.solve(&r);
    let u0 = p_inv_half.mul_vec(&m.tr_mul_vec(&mmt_inv_r));
    let hd = h_mat.mul_vec(d);
    let e: Vec<f64> = hd.iter().zip(&u0).map(|(a, b)| a - b).collect();

    let h_pinv = spectral(&h_mat, |l, lmax| if l.abs() > h_zero.max(1e-10 * lmax) { 1.0 / l } else { 0.0 });
    let s: Vec<f64> = h_pinv.mul_vec(&e).into_iter().map(|v| v.max(0.0)).collect();
    let hs = h_mat.mul_vec(&s);
    let slack: Vec<f64> = e.iter().zip(&hs).map(|(a, b)| a - b).collect();
    let tol = 1e-9 * (1.0 + norm_inf(&e) + h_mat.max_abs() * norm_inf(&s));
    let well_posed = slack.iter().zip(&s).all(|(g, si)| *g <= tol && (si * g).abs() <= tol * (1.0 + si));
    if !well_posed {
        return Ok(None);
    }

    let kappa = -0.5 * dot(d, &hd) + dot(d, &u0) + 0.5 * dot(&r, &mmt_inv_r);
    let h = -0.5 * dot(&s, &hs) + dot(&e, &s) + kappa;

    // π = (MMᵀ)⁻¹(M P^{-1/2}(d − s) + r)
    let d_minus_s: Vec<f64> = d.iter().zip(&s).map(|(a, b)| a - b).collect();
    let mut rhs_pi = m.mul_vec(&p_inv_half.mul_vec(&d_minus_s));
    for (v, ri) in rhs_pi.iter_mut().zip(&r) {
        *v += ri;
    }
    let pi = chol.solve(&rhs_pi);
    // y = P⁻¹(Dᵀπ + s − d)
    let mut t = problem.d_mat.tr_mul_vec(&pi);
    for i in 0..n2 {
        t[i] += s[i] - d[i];
    }
    let y = p_inv_half.mul_vec(&p_inv_half.mul_vec(&t));
    let subgradient = recourse_subgradient(data, &pi);
    Ok(Some(ClosedFormDual { h, pi, s, y, subgradient }))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::Stochastics;

    fn scalar_problem(p: Option<f64>, d: f64, c: f64) -> TwoStageProblem {
        TwoStageProblem {
            name: "scalar".into(),
            q: DenseMatrix::zeros(1, 1),
            c: vec![0.0],
            a: DenseMatrix::zeros(0, 1),
            b: vec![],
            lower_bounds: None,
            d_mat: DenseMatrix::identity(1),
            d: vec![d],
            p: p.map(|v| DenseMatrix::from_diagonal(&[v])),
            xi: vec![0.0],
            tech: DenseMatrix::from_diagonal(&[c]),
            stochastics: Stochastics::deterministic(),
            constant: 0.0,
            recourse_bounds: None,
        }
    }

    fn scenario(xi: f64, c: f64) -> Scenario {
        Scenario {
            data: Arc::new(ScenarioData { xi: vec![xi], tech: Arc::new(DenseMatrix::from_diagonal(&[c])) }),
            weight: 1.0,
            support_index: None,
        }
    }

    #[test]
    fn linear_scalar_subgradient() {
        // D=[1], d=1, C=[1], ξ=2, x=1 → h=1, v=−1
        let prob = scalar_problem(None, 1.0, 1.0);
        let (h, v) = subgrad_ql(&prob, &[1.0], &scenario(2.0, 1.0)).unwrap();
        assert!((h - 1.0).abs() < 1e-14 && (v[0] + 1.0).abs() < 1e-14);
        let (_, v0) = subgrad_ql(&prob, &[1.0], &scenario(2.0, 0.0)).unwrap();
        assert_eq!(v0, vec![0.0]);
    }

    #[test]
    fn quadratic_scalar_subgradient() {
        // P=I, D=[1], d=0, C=[1], ξ=1, x=0 → y=1, h=.5, π=1, g=−1
        let prob = scalar_problem(Some(1.0), 0.0, 1.0);
        let (h, g) = subgrad_qq(&prob, &[0.0], &scenario(1.0, 1.0)).unwrap();
        assert!((h - 0.5).abs() < 1e-14 && (g[0] + 1.0).abs() < 1e-14);
        let cf = closed_form_qq(&prob, &[0.0], &scenario(1.0, 1.0).data).unwrap().unwrap();
        assert!((cf.h - 0.5).abs() < 1e-12);
        assert!((cf.pi[0] - 1.0).abs() < 1e-12 && (cf.y[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_recourse_is_an_error() {
        let prob = scalar_problem(None, 1.0, 1.0);
        assert_eq!(subgrad_ql(&prob, &[3.0], &scenario(2.0, 1.0)).unwrap_err(), OracleError::RecourseInfeasible { scenario: 0 });
    }

    #[test]
    fn closed_form_matches_primal_on_two_variable_case() {
        // P = diag(1, 2), D = [1 1; 0 1], r = (3, 1): y = (2, 1), h = 3
        let mut prob = scalar_problem(Some(1.0), 0.0, 1.0);
        prob.p = Some(DenseMatrix::from_diagonal(&[1.0, 2.0]));
        prob.d = vec![0.0, 0.0];
        prob.d_mat = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let data = ScenarioData { xi: vec![3.0, 1.0], tech: Arc::new(DenseMatrix::zeros(2, 1)) };
        let (sol, _) = solve_recourse(&prob, &[0.0], &data, None).unwrap();
        assert!((sol.h - 3.0).abs() < 1e-12);
        let cf = closed_form_qq(&prob, &[0.0], &data).unwrap().expect("interior case is well-posed");
        assert!((cf.h - sol.h).abs() < 1e-9, "{} vs {}", cf.h, sol.h);
        assert!((cf.pi[0] - sol.pi[0]).abs() < 1e-9);
    }
}
