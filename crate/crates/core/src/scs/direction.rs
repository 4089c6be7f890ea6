//! Direction, sample-size and acceptance rules.

use crate::linalg::{dot, norm2, DenseMatrix};
use crate::oracle::{solve_qp_bound, Objective, OracleError, SolveStatus};

use super::ScsError;

/// Unrounded sample-size requirement `−8 ln(ε/2) (M−m)² / (κ² δ⁴)`.
pub fn sample_requirement(kappa_eps: f64, range: f64, kappa: f64, delta: f64) -> Result<f64, ScsError> {
    if !(delta > 0.0) {
        return Err(ScsError::NonPositiveDelta);
    }
    if !(kappa_eps > 0.0 && kappa_eps < 1.0) || !(kappa > 0.0) || !(range >= 0.0) {
        return Err(ScsError::InvalidParams("sample size needs 0 < eps < 1, kappa > 0, M - m >= 0".into()));
    }
    Ok(-8.0 * (kappa_eps / 2.0).ln() * range * range / (kappa * kappa * delta.powi(4)))
}

/// Number of scenarios that makes `f_S` a κδ²-accurate estimate on the
/// trust region with probability `1 − ε`, clamped to `[1, max_sample]`.
pub fn sample_size(kappa_eps: f64, range: f64, kappa: f64, delta: f64, max_sample: usize) -> Result<usize, ScsError> {
    let n = sample_requirement(kappa_eps, range, kappa, delta)?.ceil();
    let cap = max_sample.max(1);
    Ok(if n >= cap as f64 { cap } else { (n as usize).max(1) })
}

/// Minimizer over `[0, 1]` of `‖λ(−d_prev) + (1−λ)g‖`.
pub fn lambda_star(g: &[f64], d_prev: &[f64]) -> f64 {
    let s: Vec<f64> = g.iter().zip(d_prev).map(|(a, b)| a + b).collect();
    let ss = dot(&s, &s);
    if ss.sqrt() <= 1e-14 {
        return 0.0;
    }
    (dot(g, &s) / ss).clamp(0.0, 1.0)
}

/// The new direction `−[λ(−d_prev) + (1−λ)g]` and the `λ` used. A zero
/// previous direction gives the plain negative subgradient.
pub fn conjugate_direction(g: &[f64], d_prev: &[f64]) -> (Vec<f64>, f64) {
    let lambda = if d_prev.iter().all(|v| *v == 0.0) { 0.0 } else { lambda_star(g, d_prev) };
    let d = g.iter().zip(d_prev).map(|(gi, di)| lambda * di - (1.0 - lambda) * gi).collect();
    (d, lambda)
}

/// Convex weights `μ` minimizing `‖Σ μᵢ vᵢ‖`, from the active-set QP on
/// the Gram matrix. A tiny ridge keeps it positive definite when the
/// vectors are dependent.
pub fn min_norm_weights(vs: &[Vec<f64>]) -> Result<Vec<f64>, OracleError> {
    let m = vs.len();
    let mut gram = DenseMatrix::zeros(m, m);
    let mut trace = 0.0;
    for i in 0..m {
        for j in 0..=i {
            let v = dot(&vs[i], &vs[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
        trace += gram[(i, i)];
    }
    let ridge = 1e-12 * trace.max(f64::MIN_POSITIVE);
    for i in 0..m {
        gram[(i, i)] += ridge;
    }
    let ones = DenseMatrix::new(1, m, vec![1.0; m]).expect("shape");
    let sol = solve_qp_bound(&gram, &vec![0.0; m], &ones, &[1.0], &vec![0.0; m])?;
    if sol.status != SolveStatus::Optimal {
        return Err(OracleError::NumericalBreakdown("min-norm subproblem did not solve".into()));
    }
    let total: f64 = sol.y.iter().map(|w| w.max(0.0)).sum();
    Ok(sol.y.iter().map(|w| w.max(0.0) / total).collect())
}

/// Longest step `t` with `‖t d‖ ≤ δ` and `x + t d ≥ lower`, and the index
/// of the bound that blocks it, if any.
///
/// Errors with [`ScsError::ZeroCap`] when a bound already active at `x`
/// blocks the direction.
pub fn step_cap(x: &[f64], d: &[f64], delta: f64, lower: &[f64]) -> Result<(f64, Option<usize>), ScsError> {
    if !(delta > 0.0) {
        return Err(ScsError::NonPositiveDelta);
    }
    let dn = norm2(d);
    if dn == 0.0 {
        return Err(ScsError::ZeroCap);
    }
    let mut t = delta / dn;
    let mut block = None;
    for i in 0..x.len() {
        if d[i] < 0.0 && lower[i].is_finite() {
            let slack = x[i] - lower[i];
            if slack <= 0.0 {
                return Err(ScsError::ZeroCap);
            }
            let ti = slack / -d[i];
            if ti < t {
                t = ti;
                block = Some(i);
            }
        }
    }
    Ok((t, block))
}

/// Differences `f(x_cand) − f(x_prev)` on the in-sample and replication
/// functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceData {
    pub in_sample: f64,
    pub replication: f64,
}

/// Decides acceptance from objective differences: the replication decrease
/// must be at least `1/η₁` of the in-sample decrease, and the direction must
/// be long relative to the radius.
pub fn accept_from_differences(diff: AcceptanceData, d_norm: f64, eta1: f64, eta2: f64, delta: f64) -> bool {
    eta1 * diff.replication <= diff.in_sample && d_norm > eta2 * delta
}

/// Evaluates both functions at both points and applies
/// [`accept_from_differences`].
#[allow(clippy::too_many_arguments)]
pub fn acceptance_test<S: Objective, T: Objective>(
    f_s: &S,
    f_t: &T,
    x_cand: &[f64],
    x_prev: &[f64],
    d_norm: f64,
    eta1: f64,
    eta2: f64,
    delta: f64,
) -> Result<(bool, AcceptanceData), OracleError> {
    let diff = AcceptanceData {
        in_sample: f_s.evaluate(x_cand)?.value - f_s.evaluate(x_prev)?.value,
        replication: f_t.evaluate(x_cand)?.value - f_t.evaluate(x_prev)?.value,
    };
    Ok((accept_from_differences(diff, d_norm, eta1, eta2, delta), diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_size_reference_value() {
        assert_eq!(sample_size(0.05, 1.0, 1.0, 0.5, usize::MAX).unwrap(), 473);
        assert_eq!(sample_size(0.05, 1.0, 1.0, 0.5, 100).unwrap(), 100);
        assert_eq!(sample_size(0.05, 0.0, 1.0, 0.5, 100).unwrap(), 1);
        assert_eq!(sample_size(0.05, 1.0, 1.0, 0.0, 100), Err(ScsError::NonPositiveDelta));
    }

    #[test]
    fn orthogonal_pair() {
        let g = [1.0, 0.0];
        let d = [0.0, 1.0];
        assert!((lambda_star(&g, &d) - 0.5).abs() < 1e-15);
        let (dir, _) = conjugate_direction(&g, &d);
        assert!((dir[0] + 0.5).abs() < 1e-15 && (dir[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_previous_direction_is_steepest_descent() {
        let (dir, lambda) = conjugate_direction(&[3.0, -4.0], &[0.0, 0.0]);
        assert_eq!(lambda, 0.0);
        assert_eq!(dir, vec![-3.0, 4.0]);
    }

    #[test]
    fn min_norm_matches_pair_rule() {
        let g = vec![2.0, 1.0];
        let dp = vec![0.5, -1.5];
        let w = min_norm_weights(&[dp.iter().map(|v| -v).collect(), g.clone()]).unwrap();
        assert!((w[0] - lambda_star(&g, &dp)).abs() < 1e-9);
    }

    #[test]
    fn min_norm_finds_origin_in_triangle() {
        let vs = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let w = min_norm_weights(&vs).unwrap();
        let p: Vec<f64> = (0..2).map(|j| vs.iter().zip(&w).map(|(v, wi)| wi * v[j]).sum()).collect();
        assert!(norm2(&p) < 1e-9);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_by_bound() {
        let (t, block) = step_cap(&[1.0, 1.0], &[-1.0, 0.0], 10.0, &[0.0, 0.0]).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(block, Some(0));
        assert_eq!(step_cap(&[0.0, 1.0], &[-1.0, 0.0], 10.0, &[0.0, 0.0]), Err(ScsError::ZeroCap));
    }

    #[test]
    fn acceptance_cases() {
        let same = AcceptanceData { in_sample: 0.0, replication: 0.0 };
        assert!(accept_from_differences(same, 1.0, 2.0, 0.1, 1.0));
        let diverge = AcceptanceData { in_sample: -1.0, replication: 0.5 };
        assert!(!accept_from_differences(diverge, 1.0, 2.0, 0.1, 1.0));
        let full = AcceptanceData { in_sample: -1.0, replication: -1.0 };
        assert!(accept_from_differences(full, 1.0, 2.0, 0.1, 1.0));
        assert!(!accept_from_differences(full, 0.05, 2.0, 0.1, 1.0));
    }
}
