//! Primal active-set method for
//! `min ½yᵀPy + qᵀy  s.t.  D y = r, y ≥ lower`
//! with `P` positive definite on the feasible subspace.
//!
//! A feasible vertex comes from the simplex phase 1. Each iteration solves
//! the equality-constrained subproblem on the free variables with a
//! null-space method, then either takes a (possibly blocked) step or drops
//! the bound with the most negative multiplier.

use crate::linalg::{dot, least_squares, null_space_basis, Cholesky, DenseMatrix, LinalgError, DEFAULT_RANK_TOL};

use super::simplex::solve_lp_with_bounds;
use super::{OracleError, RecourseSolution, SolveStatus};

fn rank_of(m: &DenseMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    crate::linalg::PivotedQr::new(m).rank(DEFAULT_RANK_TOL)
}

/// Bound-constrained convex QP; see the module docs.
///
/// The returned [`RecourseSolution`] carries equality duals `pi` and bound
/// multipliers `bound_duals` satisfying `P y + q − Dᵀπ − μ = 0`.
pub fn solve_qp_bound(p: &DenseMatrix, q: &[f64], d: &DenseMatrix, rhs: &[f64], lower: &[f64]) -> Result<RecourseSolution, OracleError> {
    let n = q.len();
    let m = rhs.len();
    if p.rows() != n || p.cols() != n {
        return Err(OracleError::DimensionMismatch { expected: n, found: p.rows() });
    }
    if d.rows() != m || (m > 0 && d.cols() != n) {
        return Err(OracleError::DimensionMismatch { expected: m, found: d.rows() });
    }
    if lower.len() != n {
        return Err(OracleError::DimensionMismatch { expected: n, found: lower.len() });
    }

    let d = if m == 0 { DenseMatrix::zeros(0, n) } else { d.clone() };
    let start = solve_lp_with_bounds(&vec![0.0; n], &d, rhs, lower)?;
    if start.status != SolveStatus::Optimal {
        return Ok(RecourseSolution::failed(SolveStatus::Infeasible, n, m));
    }
    let mut y = start.x;

    let scale = |v: f64| 1e-12 * (1.0 + v.abs());
    let mut working: Vec<bool> = (0..n).map(|i| lower[i].is_finite() && (y[i] - lower[i]).abs() <= scale(lower[i])).collect();
    for i in 0..n {
        if working[i] {
            y[i] = lower[i];
        }
    }

    // Degenerate vertices can leave the working set linearly dependent with
    // the equality rows; free bounds until D_F regains the rank of D.
    let rank_d = rank_of(&d);
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| !working[i]).collect();
        if rank_of(&d.select_columns(&free)) >= rank_d {
            break;
        }
        let before = rank_of(&d.select_columns(&free));
        let candidate = (0..n).filter(|&i| working[i]).find(|&i| {
            let mut f = free.clone();
            f.push(i);
            rank_of(&d.select_columns(&f)) > before
        });
        match candidate {
            Some(i) => working[i] = false,
            None => break,
        }
    }

    let max_iter = 20 * (n + m) + 100;
    for _ in 0..max_iter {
        let grad: Vec<f64> = p.mul_vec(&y).iter().zip(q).map(|(a, b)| a + b).collect();
        let free: Vec<usize> = (0..n).filter(|&i| !working[i]).collect();
        let step = eqp_step(p, &d, &free, &grad)?;
        let step_norm = step.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let y_norm = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));

        if step_norm <= 1e-12 * (1.0 + y_norm) {
            let pi = equality_duals(&d, &free, &grad)?;
            let dt_pi = if m > 0 { d.tr_mul_vec(&pi) } else { vec![0.0; n] };
            let mut mu = vec![0.0; n];
            let mut worst: Option<(usize, f64)> = None;
            let gscale = 1e-10 * (1.0 + grad.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            for i in 0..n {
                if working[i] {
                    mu[i] = grad[i] - dt_pi[i];
                    if mu[i] < -gscale && worst.is_none_or(|(_, w)| mu[i] < w) {
                        worst = Some((i, mu[i]));
                    }
                }
            }
            match worst {
                Some((i, _)) => working[i] = false,
                None => {
                    let h = 0.5 * dot(&y, &p.mul_vec(&y)) + dot(q, &y);
                    return Ok(RecourseSolution { h, y, pi, bound_duals: mu, status: SolveStatus::Optimal });
                }
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for &i in &free {
            if lower[i].is_finite() && step[i] < 0.0 {
                let a = (lower[i] - y[i]) / step[i];
                if a < alpha {
                    alpha = a.max(0.0);
                    blocking = Some(i);
                }
            }
        }
        for i in 0..n {
            y[i] += alpha * step[i];
        }
        if let Some(i) = blocking {
            working[i] = true;
            y[i] = lower[i];
        }
    }
    Err(OracleError::NumericalBreakdown("active-set iteration limit".into()))
}

/// Minimiser of `½pᵀPp + gᵀp` over `{p : D p = 0, p_i = 0 for i ∉ free}`.
fn eqp_step(p: &DenseMatrix, d: &DenseMatrix, free: &[usize], grad: &[f64]) -> Result<Vec<f64>, OracleError> {
    let n = grad.len();
    let mut step = vec![0.0; n];
    if free.is_empty() {
        return Ok(step);
    }
    let d_free = d.select_columns(free);
    let basis = match null_space_basis(&d_free, DEFAULT_RANK_TOL) {
        Ok(b) => b,
        Err(LinalgError::EmptyNullSpace) => return Ok(step),
        Err(e) => return Err(e.into()),
    };
    let z = basis.z();
    let nf = free.len();
    let mut p_ff = DenseMatrix::zeros(nf, nf);
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            p_ff[(a, b)] = p[(i, j)];
        }
    }
    let reduced = z.transpose().matmul(&p_ff).matmul(z);
    let chol = Cholesky::new(&reduced).map_err(|_| OracleError::NumericalBreakdown("reduced Hessian is not positive definite".into()))?;
    let g_free: Vec<f64> = free.iter().map(|&i| grad[i]).collect();
    let zg = z.tr_mul_vec(&g_free);
    let w = chol.solve(&zg);
    let pf = z.mul_vec(&w);
    for (a, &i) in free.iter().enumerate() {
        step[i] = -pf[a];
    }
    Ok(step)
}

/// Least-squares solution of `D_Fᵀ π = g_F`.
fn equality_duals(d: &DenseMatrix, free: &[usize], grad: &[f64]) -> Result<Vec<f64>, OracleError> {
    let m = d.rows();
    if m == 0 {
        return Ok(Vec::new());
    }
    if free.is_empty() {
        return Ok(vec![0.0; m]);
    }
    let dft = d.select_columns(free).transpose();
    let g_free: Vec<f64> = free.iter().map(|&i| grad[i]).collect();
    Ok(least_squares(&dft, &g_free)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn symmetric_kkt_by_hand() {
        // P=I, d=0, D=[1 1], rhs=2 → y=(1,1), h=1, π=1
        let s = solve_qp_bound(&DenseMatrix::identity(2), &[0.0, 0.0], &mat(&[&[1.0, 1.0]]), &[2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.y[0] - 1.0).abs() < 1e-12 && (s.y[1] - 1.0).abs() < 1e-12);
        assert!((s.h - 1.0).abs() < 1e-12);
        assert!((s.pi[0] - 1.0).abs() < 1e-12);
        assert!(s.bound_duals.iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn binding_bound() {
        // P=I, d=(0,10), D=[1 1], rhs=1 → y=(1,0); μ₂ = 10 - π with π = 1
        let s = solve_qp_bound(&DenseMatrix::identity(2), &[0.0, 10.0], &mat(&[&[1.0, 1.0]]), &[1.0], &[0.0, 0.0]).unwrap();
        assert!((s.y[0] - 1.0).abs() < 1e-12 && s.y[1].abs() < 1e-12);
        assert!((s.pi[0] - 1.0).abs() < 1e-12);
        assert!((s.bound_duals[1] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_region() {
        let s = solve_qp_bound(&DenseMatrix::identity(2), &[0.0, 0.0], &mat(&[&[1.0, 1.0]]), &[-1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }
}
