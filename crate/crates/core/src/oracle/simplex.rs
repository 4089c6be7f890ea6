//! Dense revised simplex for `min cᵀy  s.t.  D y = r, y ≥ 0`.
//!
//! Two phases with artificial columns, Dantzig pricing with a switch to
//! Bland's rule after a run of degenerate pivots, and an explicit basis
//! inverse that is refactorised periodically. A basis from a previous solve
//! can be supplied as a warm start; it is used whenever it is still primal
//! feasible for the new right-hand side.

use crate::linalg::{DenseMatrix, Lu};

use super::{OracleError, SolveStatus};

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;
const DEGENERATE_RUN_LIMIT: usize = 50;
const MAX_CONDITION: f64 = 1e12;

/// Result of a standard-form LP solve.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub value: f64,
    pub x: Vec<f64>,
    /// Equality duals `π = B⁻ᵀ c_B`.
    pub duals: Vec<f64>,
    /// Reduced costs `c − Dᵀπ` (the bound multipliers).
    pub reduced_costs: Vec<f64>,
    /// Final basis; indices `≥ n` denote artificial columns left on
    /// redundant rows.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: SolveStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            value: match status {
                SolveStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            x: vec![0.0; n],
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            basis: Vec::new(),
            iterations,
        }
    }
}

struct Tableau<'a> {
    a: &'a DenseMatrix,
    rhs: &'a [f64],
    m: usize,
    n: usize,
    art_sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: DenseMatrix,
    xb: Vec<f64>,
    since_refactor: usize,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl<'a> Tableau<'a> {
    fn column(&self, j: usize) -> Vec<f64> {
        if j < self.n {
            self.a.column(j)
        } else {
            let mut e = vec![0.0; self.m];
            e[j - self.n] = self.art_sign[j - self.n];
            e
        }
    }

    fn column_dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            (0..self.m).map(|i| y[i] * self.a[(i, j)]).sum()
        } else {
            y[j - self.n] * self.art_sign[j - self.n]
        }
    }

    fn refactor(&mut self) -> Result<(), OracleError> {
        let m = self.m;
        let mut b = DenseMatrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                b[(i, k)] = v;
            }
        }
        let lu = Lu::new(&b).map_err(|_| OracleError::NumericalBreakdown("singular basis".into()))?;
        let binv = lu.inverse();
        let cond = norm1(&b) * norm1(&binv);
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(OracleError::NumericalBreakdown(format!("basis condition estimate {cond:.3e} exceeds {MAX_CONDITION:.0e}")));
        }
        self.binv = binv;
        self.xb = self.binv.mul_vec(self.rhs);
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -PIVOT_TOL {
                *v = 0.0;
            }
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = costs[j];
            if cb != 0.0 {
                for (yk, bk) in y.iter_mut().zip(self.binv.row(i)) {
                    *yk += cb * bk;
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let theta = self.xb[r] / alpha[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -PIVOT_TOL {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;

        let piv = alpha[r];
        let pivot_row: Vec<f64> = self.binv.row(r).iter().map(|v| v / piv).collect();
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for (bij, pr) in self.binv.row_mut(i).iter_mut().zip(&pivot_row) {
                *bij -= f * pr;
            }
        }
        self.binv.row_mut(r).copy_from_slice(&pivot_row);

        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.since_refactor += 1;
        self.iterations += 1;
    }

    /// Primal simplex on the current basis. Artificial columns may only
    /// enter when `allow_artificial` is set.
    fn run(&mut self, costs: &[f64], allow_artificial: bool) -> Result<PhaseOutcome, OracleError> {
        let total = self.n + self.m;
        let cmax = costs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let opt_tol = 1e-9 * (1.0 + cmax);
        loop {
            if self.iterations >= self.max_iterations {
                return Err(OracleError::NumericalBreakdown("simplex iteration limit".into()));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals(costs);
            let limit = if allow_artificial { total } else { self.n };
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..limit {
                if self.in_basis[j] {
                    continue;
                }
                let rc = costs[j] - self.column_dot(&y, j);
                if rc < -opt_tol {
                    if self.bland {
                        entering = Some((j, rc));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| rc < best) {
                        entering = Some((j, rc));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            let alpha = self.binv.mul_vec(&self.column(q));
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if alpha[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / alpha[i];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            let better = if tie {
                                if self.bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    alpha[i] > alpha[r]
                                }
                            } else {
                                ratio < best
                            };
                            if better {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, theta)) = leave else {
                return Ok(PhaseOutcome::Unbounded);
            };
            if theta <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_RUN_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, q, &alpha);
        }
    }

    /// Pivots basic artificials out of the basis where a structural column
    /// can replace them; the rest sit on redundant rows at level zero.
    fn expel_artificials(&mut self) -> Result<(), OracleError> {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let row = self.binv.row(r).to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let v = self.column_dot(&row, j).abs();
                if v > 1e-7 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.binv.mul_vec(&self.column(q));
                self.pivot(r, q, &alpha);
            }
        }
        self.refactor()
    }
}

fn norm1(m: &DenseMatrix) -> f64 {
    (0..m.cols()).map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `min cᵀy s.t. D y = r, y ≥ 0`, optionally warm-started.
pub fn solve_standard_lp(cost: &[f64], d: &DenseMatrix, rhs: &[f64], warm: Option<&[usize]>) -> Result<LpSolution, OracleError> {
    let (m, n) = (d.rows(), d.cols());
    if cost.len() != n {
        return Err(OracleError::DimensionMismatch { expected: n, found: cost.len() });
    }
    if rhs.len() != m {
        return Err(OracleError::DimensionMismatch { expected: m, found: rhs.len() });
    }
    if rhs.iter().chain(cost).any(|v| !v.is_finite()) {
        return Err(OracleError::NumericalBreakdown("non-finite LP data".into()));
    }
    if m == 0 {
        // Only bounds: optimal at zero unless some cost is negative.
        if cost.iter().any(|c| *c < 0.0) {
            return Ok(LpSolution::non_optimal(SolveStatus::Unbounded, n, m, 0));
        }
        return Ok(LpSolution {
            status: SolveStatus::Optimal,
            value: 0.0,
            x: vec![0.0; n],
            duals: Vec::new(),
            reduced_costs: cost.to_vec(),
            basis: Vec::new(),
            iterations: 0,
        });
    }

    let art_sign: Vec<f64> = rhs.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut tab = Tableau {
        a: d,
        rhs,
        m,
        n,
        art_sign,
        basis: (n..n + m).collect(),
        in_basis: (0..n + m).map(|j| j >= n).collect(),
        binv: DenseMatrix::zeros(m, m),
        xb: Vec::new(),
        since_refactor: 0,
        bland: false,
        degenerate_run: 0,
        iterations: 0,
        max_iterations: 100 * (n + m) + 1000,
    };

    let mut phase2_cost: Vec<f64> = cost.to_vec();
    phase2_cost.extend(std::iter::repeat_n(0.0, m));
    let rhs_scale = 1.0 + rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let warm_ok = match warm {
        Some(basis) if basis.len() == m && basis.iter().all(|&j| j < n + m) => {
            let mut seen = vec![false; n + m];
            let distinct = basis.iter().all(|&j| !std::mem::replace(&mut seen[j], true));
            if distinct {
                tab.basis = basis.to_vec();
                tab.in_basis = seen;
                match tab.refactor() {
                    Ok(()) => {
                        tab.basis.iter().zip(&tab.xb).all(|(&j, &v)| v >= -1e-9 * rhs_scale && (j < n || v.abs() <= 1e-9 * rhs_scale))
                    }
                    Err(_) => false,
                }
            } else {
                false
            }
        }
        _ => false,
    };

    if !warm_ok {
        tab.basis = (n..n + m).collect();
        tab.in_basis = (0..n + m).map(|j| j >= n).collect();
        tab.refactor()?;
        let mut phase1_cost = vec![0.0; n];
        phase1_cost.extend(std::iter::repeat_n(1.0, m));
        tab.run(&phase1_cost, true)?;
        let infeas: f64 = tab.basis.iter().zip(&tab.xb).filter(|(j, _)| **j >= n).map(|(_, v)| v.max(0.0)).sum();
        if infeas > 1e-8 * rhs_scale {
            return Ok(LpSolution::non_optimal(SolveStatus::Infeasible, n, m, tab.iterations));
        }
        tab.expel_artificials()?;
        tab.bland = false;
        tab.degenerate_run = 0;
    }

    if let PhaseOutcome::Unbounded = tab.run(&phase2_cost, false)? {
        return Ok(LpSolution::non_optimal(SolveStatus::Unbounded, n, m, tab.iterations));
    }
    if tab.since_refactor > 0 {
        tab.refactor()?;
    }

    let mut x = vec![0.0; n];
    for (&j, &v) in tab.basis.iter().zip(&tab.xb) {
        if j < n {
            x[j] = v.max(0.0);
        }
    }
    let duals = tab.duals(&phase2_cost);
    let reduced_costs: Vec<f64> = (0..n).map(|j| cost[j] - tab.column_dot(&duals, j)).collect();
    let value = crate::linalg::dot(cost, &x);
    Ok(LpSolution { status: SolveStatus::Optimal, value, x, duals, reduced_costs, basis: tab.basis, iterations: tab.iterations })
}

/// Solves `min cᵀz s.t. E z = e, z ≥ lower` where `lower` may contain
/// `-inf` (free variables). Finite bounds are shifted and free variables
/// split before calling [`solve_standard_lp`].
pub fn solve_lp_with_bounds(cost: &[f64], e: &DenseMatrix, rhs: &[f64], lower: &[f64]) -> Result<LpSolution, OracleError> {
    let n = e.cols();
    if lower.len() != n || cost.len() != n {
        return Err(OracleError::DimensionMismatch { expected: n, found: lower.len() });
    }
    let free: Vec<usize> = (0..n).filter(|&j| !lower[j].is_finite()).collect();
    let n_std = n + free.len();
    let mut mat = DenseMatrix::zeros(e.rows(), n_std);
    let mut shifted = rhs.to_vec();
    let mut c_std = cost.to_vec();
    for i in 0..e.rows() {
        for j in 0..n {
            mat[(i, j)] = e[(i, j)];
            if lower[j].is_finite() {
                shifted[i] -= e[(i, j)] * lower[j];
            }
        }
        for (k, &j) in free.iter().enumerate() {
            mat[(i, n + k)] = -e[(i, j)];
        }
    }
    for &j in &free {
        c_std.push(-cost[j]);
    }
    let sol = solve_standard_lp(&c_std, &mat, &shifted, None)?;
    if sol.status != SolveStatus::Optimal {
        return Ok(LpSolution::non_optimal(sol.status, n, e.rows(), sol.iterations));
    }
    let mut x: Vec<f64> = (0..n).map(|j| if lower[j].is_finite() { sol.x[j] + lower[j] } else { sol.x[j] }).collect();
    for (k, &j) in free.iter().enumerate() {
        x[j] -= sol.x[n + k];
    }
    let value = crate::linalg::dot(cost, &x);
    Ok(LpSolution {
        status: SolveStatus::Optimal,
        value,
        x,
        duals: sol.duals,
        reduced_costs: sol.reduced_costs[..n].to_vec(),
        basis: sol.basis,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_variable() {
        let s = solve_standard_lp(&[1.0], &mat(&[&[1.0]]), &[1.0], None).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!((s.value, s.x[0], s.duals[0]), (1.0, 1.0, 1.0));
        let inf = solve_standard_lp(&[1.0], &mat(&[&[1.0]]), &[-1.0], None).unwrap();
        assert_eq!(inf.status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        // min -y1  s.t. y1 - y2 = 1
        let s = solve_standard_lp(&[-1.0, 0.0], &mat(&[&[1.0, -1.0]]), &[1.0], None).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_keep_duals_consistent() {
        let d = mat(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0], &[0.0, 1.0, 1.0]]);
        let s = solve_standard_lp(&[1.0, 2.0, 1.0], &d, &[1.0, 2.0, 1.0], None).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.value - 2.0).abs() < 1e-12, "{}", s.value);
        let dual_value: f64 = s.duals.iter().zip([1.0, 2.0, 1.0]).map(|(p, r)| p * r).sum();
        assert!((dual_value - s.value).abs() < 1e-9);
    }

    #[test]
    fn warm_start_reuses_basis() {
        let d = mat(&[&[1.0, 1.0, 1.0, 0.0], &[1.0, -1.0, 0.0, 1.0]]);
        let c = [-1.0, -2.0, 0.0, 0.0];
        let cold = solve_standard_lp(&c, &d, &[4.0, 1.0], None).unwrap();
        let warm = solve_standard_lp(&c, &d, &[4.5, 1.0], Some(&cold.basis)).unwrap();
        let check = solve_standard_lp(&c, &d, &[4.5, 1.0], None).unwrap();
        assert!((warm.value - check.value).abs() < 1e-12);
        assert!(warm.iterations <= check.iterations);
    }

    #[test]
    fn free_and_shifted_bounds() {
        // z1 - z2 = 3, z1 >= 1, z2 free; min -z1 is unbounded
        let e = mat(&[&[1.0, -1.0]]);
        let s = solve_lp_with_bounds(&[-1.0, 0.0], &e, &[3.0], &[1.0, f64::NEG_INFINITY]).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
        // min z1 → z1 = 1, z2 = -2
        let t = solve_lp_with_bounds(&[1.0, 0.0], &e, &[3.0], &[1.0, f64::NEG_INFINITY]).unwrap();
        assert_eq!(t.status, SolveStatus::Optimal);
        assert!((t.x[0] - 1.0).abs() < 1e-12 && (t.x[1] + 2.0).abs() < 1e-12);
    }
}
