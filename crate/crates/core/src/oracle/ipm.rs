//! Primal-dual interior-point method (Mehrotra predictor-corrector) for
//! convex quadratic programs with a positive *semi*definite Hessian:
//!
//! ```text
//! min ½zᵀHz + fᵀz   s.t.  E z = e,  z_j ≥ l_j  (l_j may be -inf)
//! ```
//!
//! Used for extensive forms whose Hessian is singular (e.g. a quadratic
//! first stage with linear recourse), which the active-set engine cannot
//! handle. The Newton systems are solved densely.

use crate::linalg::{dot, norm_inf, DenseMatrix, Lu};

use super::OracleError;

const MAX_ITER: usize = 200;

#[derive(Debug, Clone)]
pub struct IpmSolution {
    pub z: Vec<f64>,
    pub value: f64,
    pub eq_duals: Vec<f64>,
    pub bound_duals: Vec<f64>,
    pub iterations: usize,
}

pub fn solve_convex_qp(
    hessian: Option<&DenseMatrix>,
    f: &[f64],
    e: &DenseMatrix,
    rhs: &[f64],
    lower: &[f64],
) -> Result<IpmSolution, OracleError> {
    let n = f.len();
    let m = rhs.len();
    if e.rows() != m || (m > 0 && e.cols() != n) || lower.len() != n {
        return Err(OracleError::DimensionMismatch { expected: n, found: e.cols() });
    }
    if let Some(h) = hessian {
        if h.rows() != n || h.cols() != n {
            return Err(OracleError::DimensionMismatch { expected: n, found: h.rows() });
        }
    }
    let bounded: Vec<bool> = lower.iter().map(|l| l.is_finite()).collect();
    let nb = bounded.iter().filter(|b| **b).count();

    let hmul = |z: &[f64]| -> Vec<f64> {
        match hessian {
            Some(h) => h.mul_vec(z),
            None => vec![0.0; n],
        }
    };

    let mut z: Vec<f64> = (0..n).map(|j| if bounded[j] { lower[j] + 1.0 } else { 0.0 }).collect();
    let mut s: Vec<f64> = bounded.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
    let mut lam = vec![0.0; m];

    let hscale = hessian.map_or(0.0, DenseMatrix::max_abs);
    let emax = e.max_abs();
    let reg_p = 1e-11 * (1.0 + hscale);
    let reg_d = 1e-11 * (1.0 + emax);
    let tol_p = 1e-9 * (1.0 + norm_inf(rhs));
    let tol_d = 1e-9 * (1.0 + norm_inf(f) + hscale);

    for it in 0..MAX_ITER {
        let hz = hmul(&z);
        let et_lam = if m > 0 { e.tr_mul_vec(&lam) } else { vec![0.0; n] };
        let r_d: Vec<f64> = (0..n).map(|j| hz[j] + f[j] - et_lam[j] - s[j]).collect();
        let r_p: Vec<f64> = if m > 0 { e.mul_vec(&z).iter().zip(rhs).map(|(a, b)| a - b).collect() } else { Vec::new() };
        let w: Vec<f64> = (0..n).map(|j| if bounded[j] { z[j] - lower[j] } else { 1.0 }).collect();
        let gap: f64 = (0..n).filter(|&j| bounded[j]).map(|j| w[j] * s[j]).sum();
        let mu = if nb > 0 { gap / nb as f64 } else { 0.0 };
        let obj = 0.5 * dot(&z, &hz) + dot(f, &z);

        if norm_inf(&r_p) <= tol_p && norm_inf(&r_d) <= tol_d && gap <= 1e-13 * (1.0 + obj.abs()) {
            return Ok(IpmSolution { z, value: obj, eq_duals: lam, bound_duals: s, iterations: it });
        }

        // [H + Σ + δI   Eᵀ ] [dz  ]   [ -r_d + rc/w ]
        // [E          -δI  ] [-dλ ] = [ -r_p        ]
        let dim = n + m;
        let mut k = DenseMatrix::zeros(dim, dim);
        if let Some(h) = hessian {
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] = h[(i, j)];
                }
            }
        }
        for j in 0..n {
            k[(j, j)] += reg_p + if bounded[j] { s[j] / w[j] } else { 0.0 };
        }
        for i in 0..m {
            for j in 0..n {
                let v = e[(i, j)];
                if v != 0.0 {
                    k[(n + i, j)] = v;
                    k[(j, n + i)] = v;
                }
            }
            k[(n + i, n + i)] = -reg_d;
        }
        // The regularized system is quasi-definite, so only a zero pivot is fatal.
        let lu = Lu::with_tolerance(&k, 0.0).map_err(|_| OracleError::NumericalBreakdown("singular KKT system".into()))?;

        let solve = |rc: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let mut b = vec![0.0; dim];
            for j in 0..n {
                b[j] = -r_d[j] + if bounded[j] { rc[j] / w[j] } else { 0.0 };
            }
            for i in 0..m {
                b[n + i] = -r_p[i];
            }
            let sol = lu.solve(&b);
            let dz = sol[..n].to_vec();
            let dlam: Vec<f64> = sol[n..].iter().map(|v| -v).collect();
            let ds: Vec<f64> = (0..n).map(|j| if bounded[j] { (rc[j] - s[j] * dz[j]) / w[j] } else { 0.0 }).collect();
            (dz, dlam, ds)
        };

        let max_step = |dz: &[f64], ds: &[f64]| -> f64 {
            let mut a: f64 = 1.0;
            for j in 0..n {
                if bounded[j] {
                    if dz[j] < 0.0 {
                        a = a.min(-w[j] / dz[j]);
                    }
                    if ds[j] < 0.0 {
                        a = a.min(-s[j] / ds[j]);
                    }
                }
            }
            a
        };

        let rc_aff: Vec<f64> = (0..n).map(|j| if bounded[j] { -w[j] * s[j] } else { 0.0 }).collect();
        let (dz_a, _, ds_a) = solve(&rc_aff);
        let a_aff = max_step(&dz_a, &ds_a);
        let mu_aff = if nb > 0 {
            (0..n).filter(|&j| bounded[j]).map(|j| (w[j] + a_aff * dz_a[j]) * (s[j] + a_aff * ds_a[j])).sum::<f64>() / nb as f64
        } else {
            0.0
        };
        let sigma = if mu > 0.0 { (mu_aff / mu).powi(3).min(1.0) } else { 0.0 };

        let rc: Vec<f64> = (0..n).map(|j| if bounded[j] { -w[j] * s[j] - dz_a[j] * ds_a[j] + sigma * mu } else { 0.0 }).collect();
        let (dz, dlam, ds) = solve(&rc);
        let alpha = (0.995 * max_step(&dz, &ds)).min(1.0);
        for j in 0..n {
            z[j] += alpha * dz[j];
            s[j] += alpha * ds[j];
        }
        for i in 0..m {
            lam[i] += alpha * dlam[i];
        }
    }
    Err(OracleError::NotConverged("interior-point iteration limit".into()))
}
