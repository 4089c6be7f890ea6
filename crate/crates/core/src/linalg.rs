//! Dense linear algebra used throughout the solver.
//!
//! Everything here works on small, dense, row-major matrices. The important
//! pieces are the rank-revealing QR factorisation (which yields orthonormal
//! null-space bases, so `Z Zᵀ` is an exact orthogonal projector) and the
//! projections onto affine and polyhedral sets.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

/// Default relative rank tolerance for [`null_space_basis`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("null space is trivial: the matrix has full column rank")]
    EmptyNullSpace,
    #[error("linear system is numerically singular")]
    SingularSystem,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("feasible region is empty")]
    InfeasibleRegion,
    #[error("projection failed: {0}")]
    Projection(String),
}

/// Dense row-major matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { row: pos / cols.max(1), col: pos % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// `self · v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "tr_mul_vec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            if *vi != 0.0 {
                axpy(*vi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a != 0.0 {
                    let src = other.row(k);
                    for (o, s) in out.row_mut(i).iter_mut().zip(src) {
                        *o += a * s;
                    }
                }
            }
        }
        out
    }

    /// Columns `idx` of `self`, in order.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out[(i, k)] = self[(i, j)];
            }
        }
        out
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.rows > 0 && other.rows > 0 && self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, found: other.cols });
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix { rows: self.rows + other.rows, cols, data })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha · x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

// ---------------------------------------------------------------------------
// Rank-revealing QR
// ---------------------------------------------------------------------------

/// Householder QR with column pivoting, `M P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// R in the upper triangle, Householder vectors below the diagonal.
    qr: DenseMatrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn new(m: &DenseMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let mut qr = m.clone();
        let steps = rows.min(cols);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut norms: Vec<f64> = (0..cols).map(|j| (0..rows).map(|i| qr[(i, j)].powi(2)).sum()).collect();

        for k in 0..steps {
            // Pivot the column with the largest remaining norm into place.
            let p = (k..cols).max_by(|&a, &b| norms[a].total_cmp(&norms[b])).unwrap_or(k);
            if p != k {
                for i in 0..rows {
                    let tmp = qr[(i, k)];
                    qr[(i, k)] = qr[(i, p)];
                    qr[(i, p)] = tmp;
                }
                perm.swap(k, p);
                norms.swap(k, p);
            }

            let alpha: f64 = (k..rows).map(|i| qr[(i, k)].powi(2)).sum::<f64>().sqrt();
            if alpha == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let x0 = qr[(k, k)];
            let beta = if x0 >= 0.0 { -alpha } else { alpha };
            let v0 = x0 - beta;
            for i in k + 1..rows {
                qr[(i, k)] /= v0;
            }
            tau[k] = (beta - x0) / beta;
            qr[(k, k)] = beta;

            for j in k + 1..cols {
                let mut s = qr[(k, j)];
                for i in k + 1..rows {
                    s += qr[(i, k)] * qr[(i, j)];
                }
                s *= tau[k];
                qr[(k, j)] -= s;
                for i in k + 1..rows {
                    let vik = qr[(i, k)];
                    qr[(i, j)] -= s * vik;
                }
                // Recompute rather than downdate; matrices here are small.
                norms[j] = (k + 1..rows).map(|i| qr[(i, j)].powi(2)).sum();
            }
        }
        Self { qr, tau, perm }
    }

    /// Numerical rank: diagonal entries of R above `tol · |R₀₀|`.
    pub fn rank(&self, tol: f64) -> usize {
        let steps = self.tau.len();
        if steps == 0 {
            return 0;
        }
        let r00 = self.qr[(0, 0)].abs();
        if r00 == 0.0 {
            return 0;
        }
        (0..steps).take_while(|&k| self.qr[(k, k)].abs() > tol * r00).count()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Applies `Q` to the columns of `b` in place.
    fn apply_q(&self, b: &mut DenseMatrix) {
        let rows = self.qr.rows();
        for k in (0..self.tau.len()).rev() {
            if self.tau[k] == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                let mut s = b[(k, j)];
                for i in k + 1..rows {
                    s += self.qr[(i, k)] * b[(i, j)];
                }
                s *= self.tau[k];
                b[(k, j)] -= s;
                for i in k + 1..rows {
                    b[(i, j)] -= s * self.qr[(i, k)];
                }
            }
        }
    }

    /// Applies `Qᵀ` to a vector in place.
    fn apply_qt(&self, v: &mut [f64]) {
        let rows = self.qr.rows();
        for k in 0..self.tau.len() {
            if self.tau[k] == 0.0 {
                continue;
            }
            let mut s = v[k];
            for i in k + 1..rows {
                s += self.qr[(i, k)] * v[i];
            }
            s *= self.tau[k];
            v[k] -= s;
            for i in k + 1..rows {
                v[i] -= s * self.qr[(i, k)];
            }
        }
    }

    /// The full square orthogonal factor.
    pub fn q_full(&self) -> DenseMatrix {
        let mut q = DenseMatrix::identity(self.qr.rows());
        self.apply_q(&mut q);
        q
    }

    /// Basic least-squares solution of `M z = b` using the leading `rank`
    /// columns; remaining components are zero.
    pub fn solve_least_squares(&self, b: &[f64], rank: usize) -> Vec<f64> {
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let mut zp = vec![0.0; self.qr.cols()];
        for i in (0..rank).rev() {
            let mut s = qtb[i];
            for j in i + 1..rank {
                s -= self.qr[(i, j)] * zp[j];
            }
            zp[i] = s / self.qr[(i, i)];
        }
        let mut z = vec![0.0; self.qr.cols()];
        for (k, &p) in self.perm.iter().enumerate() {
            z[p] = zp[k];
        }
        z
    }
}

/// Least-squares solution of `m z ≈ b` tolerant of rank deficiency.
pub fn least_squares(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch { expected: m.rows(), found: b.len() });
    }
    if m.is_empty() {
        return Ok(vec![0.0; m.cols()]);
    }
    let qr = PivotedQr::new(m);
    let rank = qr.rank(DEFAULT_RANK_TOL);
    Ok(qr.solve_least_squares(b, rank))
}

// ---------------------------------------------------------------------------
// Null spaces
// ---------------------------------------------------------------------------

/// Orthonormal basis `Z` of `{d : A d = 0}`.
#[derive(Debug, Clone)]
pub struct NullSpaceBasis {
    z: DenseMatrix,
    rank_a: usize,
    tol_rank: f64,
}

impl NullSpaceBasis {
    /// Basis of the whole space (used when there are no constraints).
    pub fn full(n: usize) -> Self {
        Self { z: DenseMatrix::identity(n), rank_a: 0, tol_rank: DEFAULT_RANK_TOL }
    }

    pub fn z(&self) -> &DenseMatrix {
        &self.z
    }

    pub fn rank_a(&self) -> usize {
        self.rank_a
    }

    pub fn tol_rank(&self) -> f64 {
        self.tol_rank
    }

    /// Ambient dimension `n₁`.
    pub fn ambient_dim(&self) -> usize {
        self.z.rows()
    }

    /// Dimension of the null space.
    pub fn dim(&self) -> usize {
        self.z.cols()
    }

    /// `Z Zᵀ v`
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        project_null(self, v)
    }
}

/// Orthonormal basis of the null space of `a`, from a pivoted QR of `aᵀ`.
///
/// Rank is the number of diagonal entries of R above `tol_rank · |R₀₀|`.
/// Returns [`LinalgError::EmptyNullSpace`] when `a` has full column rank.
pub fn null_space_basis(a: &DenseMatrix, tol_rank: f64) -> Result<NullSpaceBasis, LinalgError> {
    let n = a.cols();
    if a.rows() == 0 {
        return Ok(NullSpaceBasis { z: DenseMatrix::identity(n), rank_a: 0, tol_rank });
    }
    let qr = PivotedQr::new(&a.transpose());
    let rank = qr.rank(tol_rank);
    if rank >= n {
        return Err(LinalgError::EmptyNullSpace);
    }
    let q = qr.q_full();
    let keep: Vec<usize> = (rank..n).collect();
    Ok(NullSpaceBasis { z: q.select_columns(&keep), rank_a: rank, tol_rank })
}

/// Orthogonal projection `Z Zᵀ v` onto the null space.
pub fn project_null(basis: &NullSpaceBasis, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let z = &basis.z;
    if v.len() != z.rows() {
        return Err(LinalgError::DimensionMismatch { expected: z.rows(), found: v.len() });
    }
    let coeffs = z.tr_mul_vec(v);
    Ok(z.mul_vec(&coeffs))
}

// ---------------------------------------------------------------------------
// Factorisations
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn new(m: &DenseMatrix) -> Result<Self, LinalgError> {
        let n = m.rows();
        if m.cols() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: m.cols() });
        }
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 1e-14 * scale {
                return Err(LinalgError::NotPositiveDefinite);
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}

/// LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl Lu {
    pub fn new(m: &DenseMatrix) -> Result<Self, LinalgError> {
        Self::with_tolerance(m, 1e-14)
    }

    /// Fails when a pivot is at most `rel_tol · max|m|`; `rel_tol = 0` only
    /// rejects exact zeros.
    pub fn with_tolerance(m: &DenseMatrix, rel_tol: f64) -> Result<Self, LinalgError> {
        let n = m.rows();
        if m.cols() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: m.cols() });
        }
        let scale = m.max_abs();
        let mut lu = m.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&a, &b| lu[(a, k)].abs().total_cmp(&lu[(b, k)].abs())).unwrap_or(k);
            if lu[(p, k)].abs() <= rel_tol * scale || scale == 0.0 || !lu[(p, k)].is_finite() {
                return Err(LinalgError::SingularSystem);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves `Mᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.lu[(k, i)] * y[k];
            }
            y[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.lu[(k, i)] * y[k];
            }
            y[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.piv.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// Euclidean projection of `x` onto `{z : A z = b}`: `x − Aᵀ(AAᵀ)⁻¹(Ax − b)`.
pub fn project_affine(a: &DenseMatrix, b: &[f64], x: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if x.len() != a.cols() {
        return Err(LinalgError::DimensionMismatch { expected: a.cols(), found: x.len() });
    }
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch { expected: a.rows(), found: b.len() });
    }
    if a.rows() == 0 {
        return Ok(x.to_vec());
    }
    let aat = a.matmul(&a.transpose());
    let chol = Cholesky::new(&aat).map_err(|_| LinalgError::SingularSystem)?;
    let resid = sub(&a.mul_vec(x), b);
    let w = chol.solve(&resid);
    let corr = a.tr_mul_vec(&w);
    Ok(sub(x, &corr))
}

/// Euclidean projection onto `{z : A z = b, z ≥ lower}`.
///
/// Entries of `lower` may be `-inf`. The projection is the quadratic program
/// `min ½‖z − x‖²`, solved with the active-set engine in [`crate::oracle`].
pub fn project_polyhedral(a: &DenseMatrix, b: &[f64], lower: &[f64], x: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.cols();
    if x.len() != n || lower.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: if x.len() != n { x.len() } else { lower.len() } });
    }
    let lin: Vec<f64> = x.iter().map(|v| -v).collect();
    let sol =
        crate::oracle::solve_qp_bound(&DenseMatrix::identity(n), &lin, a, b, lower).map_err(|e| LinalgError::Projection(e.to_string()))?;
    match sol.status {
        crate::oracle::SolveStatus::Optimal => Ok(sol.y),
        crate::oracle::SolveStatus::Infeasible => Err(LinalgError::InfeasibleRegion),
        crate::oracle::SolveStatus::Unbounded => Err(LinalgError::Projection("unbounded projection".into())),
    }
}

/// Eigenvalues (ascending) of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(to_nalgebra(m));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `V f(Λ) Vᵀ` for symmetric `m`; `f` receives each eigenvalue and the
/// largest eigenvalue magnitude.
pub fn spectral_map(m: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
    let eig = nalgebra::SymmetricEigen::new(to_nalgebra(m));
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mapped = eig.eigenvalues.map(|l| f(l, lmax));
    let out = &eig.eigenvectors * nalgebra::DMatrix::from_diagonal(&mapped) * eig.eigenvectors.transpose();
    let (r, c) = out.shape();
    let data = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| out[(i, j)]).collect();
    DenseMatrix::new(r, c, data).expect("finite spectral map")
}

fn to_nalgebra(m: &DenseMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(matches!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(LinalgError::NonFinite { row: 0, col: 1 })));
    }

    #[test]
    fn null_space_of_single_row() {
        let a = mat(&[&[1.0, 1.0]]);
        let ns = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(ns.dim(), 1);
        let z = ns.z().column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z[0].abs() - s).abs() < 1e-14);
        assert!((z[0] + z[1]).abs() < 1e-14);
    }

    #[test]
    fn identity_has_empty_null_space() {
        let a = DenseMatrix::identity(2);
        assert_eq!(null_space_basis(&a, DEFAULT_RANK_TOL).unwrap_err(), LinalgError::EmptyNullSpace);
    }

    #[test]
    fn rank_deficient_rows_are_detected() {
        let a = mat(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        let ns = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(ns.rank_a(), 1);
        assert_eq!(ns.dim(), 2);
    }

    #[test]
    fn project_null_hand_example() {
        let a = mat(&[&[1.0, 1.0]]);
        let ns = null_space_basis(&a, DEFAULT_RANK_TOL).unwrap();
        let p = project_null(&ns, &[2.0, 0.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] + 1.0).abs() < 1e-14);
        // complement is annihilated, range is fixed
        let k = project_null(&ns, &[3.0, 3.0]).unwrap();
        assert!(norm_inf(&k) < 1e-14);
        let r = project_null(&ns, &[0.5, -0.5]).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-14);
        assert!(matches!(project_null(&ns, &[1.0]), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn affine_projection_examples() {
        let a = mat(&[&[1.0, 1.0]]);
        let p = project_affine(&a, &[2.0], &[0.0, 0.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14 && (p[1] - 1.0).abs() < 1e-14);
        let q = project_affine(&a, &[2.0], &[0.5, 1.5]).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-14 && (q[1] - 1.5).abs() < 1e-14);
        let singular = mat(&[&[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(project_affine(&singular, &[1.0, 2.0], &[0.0, 0.0]).unwrap_err(), LinalgError::SingularSystem);
    }

    #[test]
    fn polyhedral_projection_examples() {
        let a = mat(&[&[1.0, 1.0]]);
        // 2-variable KKT enumeration: {z1+z2=1, z>=0}, x=(2,-2) → (1,0)
        let p = project_polyhedral(&a, &[1.0], &[0.0, 0.0], &[2.0, -2.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12, "{p:?}");
        // interior point is fixed
        let q = project_polyhedral(&a, &[1.0], &[0.0, 0.0], &[0.3, 0.7]).unwrap();
        assert!((q[0] - 0.3).abs() < 1e-12 && (q[1] - 0.7).abs() < 1e-12);
        // no bounds reduces to the affine projection
        let inf = [f64::NEG_INFINITY; 2];
        let r = project_polyhedral(&a, &[1.0], &inf, &[2.0, -2.0]).unwrap();
        let s = project_affine(&a, &[1.0], &[2.0, -2.0]).unwrap();
        assert!(norm_inf(&sub(&r, &s)) < 1e-12);
        // empty region
        let bad = project_polyhedral(&a, &[-1.0], &[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(bad.unwrap_err(), LinalgError::InfeasibleRegion);
    }

    #[test]
    fn lu_and_cholesky_solve() {
        let m = mat(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let x = Lu::new(&m).unwrap().solve(&[1.0, 2.0]);
        let y = Cholesky::new(&m).unwrap().solve(&[1.0, 2.0]);
        let xt = Lu::new(&m).unwrap().solve_transpose(&[1.0, 2.0]);
        for v in [x, y, xt] {
            assert!((v[0] - 1.0 / 11.0).abs() < 1e-14);
            assert!((v[1] - 7.0 / 11.0).abs() < 1e-14);
        }
        assert!(Cholesky::new(&mat(&[&[1.0, 2.0], &[2.0, 1.0]])).is_err());
    }
}
