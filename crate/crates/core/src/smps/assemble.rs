use crate::linalg::DenseMatrix;
use crate::model::{Marginal, RandomEntry, RandomPosition, Stochastics, TwoStageProblem};

use super::{CoreModel, PeriodSplit, RowKind, RowRef, SmpsError, StochModel};

fn unsupported(msg: &str) -> SmpsError {
    SmpsError::UnsupportedStructure(msg.to_string())
}

/// Maps a parsed triple onto a [`TwoStageProblem`].
///
/// First-stage inequality rows get slack columns and finite first-stage
/// upper bounds become extra equality rows with slacks; finite lower bounds
/// stay as bounds. Second-stage variables are shifted to `y ≥ 0` (free ones
/// are split), inequality rows and upper bounds likewise get zero-cost
/// slacks.
pub fn assemble(core: &CoreModel, split: &PeriodSplit, stoch: &StochModel) -> Result<TwoStageProblem, SmpsError> {
    if core.ranges.iter().any(Option::is_some) {
        return Err(unsupported("RANGES are not supported"));
    }
    let n1_orig = split.first_stage_columns;
    let m1_orig = split.first_stage_rows;
    let ncols = core.num_columns();
    let nrows = core.num_rows();
    if n1_orig >= ncols || m1_orig > nrows {
        return Err(SmpsError::NotTwoPeriods);
    }
    let mut dense = vec![vec![0.0; ncols]; nrows];
    for &(i, j, v) in &core.coefficients {
        if i < m1_orig && j >= n1_orig && v != 0.0 {
            return Err(unsupported("second-stage column appears in a first-stage row"));
        }
        dense[i][j] += v;
    }

    // First stage: original columns, row slacks, upper-bound slacks.
    let row_slacks1: Vec<usize> = (0..m1_orig).filter(|&i| core.rows[i].kind != RowKind::Eq).collect();
    let ub_cols1: Vec<usize> = (0..n1_orig).filter(|&j| core.upper[j].is_finite()).collect();
    let n1 = n1_orig + row_slacks1.len() + ub_cols1.len();
    let m1 = m1_orig + ub_cols1.len();
    let mut a = DenseMatrix::zeros(m1, n1);
    let mut b = vec![0.0; m1];
    for i in 0..m1_orig {
        for j in 0..n1_orig {
            a[(i, j)] = dense[i][j];
        }
        b[i] = core.rhs[i];
    }
    for (k, &i) in row_slacks1.iter().enumerate() {
        a[(i, n1_orig + k)] = if core.rows[i].kind == RowKind::Le { 1.0 } else { -1.0 };
    }
    for (k, &j) in ub_cols1.iter().enumerate() {
        let row = m1_orig + k;
        a[(row, j)] = 1.0;
        a[(row, n1_orig + row_slacks1.len() + k)] = 1.0;
        b[row] = core.upper[j];
    }
    let mut lower = vec![0.0; n1];
    lower[..n1_orig].copy_from_slice(&core.lower[..n1_orig]);
    let mut c = vec![0.0; n1];
    c[..n1_orig].copy_from_slice(&core.objective[..n1_orig]);

    // Second stage columns: each original column maps to one or two
    // nonnegative columns with a sign, plus a shift of the original value.
    let stage2_rows: Vec<usize> = (m1_orig..nrows).collect();
    let m2_orig = stage2_rows.len();
    let mut y_cols: Vec<(usize, f64)> = Vec::new();
    let mut shift = vec![0.0; ncols];
    let mut ub_rows2: Vec<(usize, f64)> = Vec::new();
    let mut constant = core.objective_constant;
    for j in n1_orig..ncols {
        let (lo, up) = (core.lower[j], core.upper[j]);
        if lo.is_finite() {
            shift[j] = lo;
            y_cols.push((j, 1.0));
            if up.is_finite() {
                ub_rows2.push((y_cols.len() - 1, up - lo));
            }
        } else if up.is_finite() {
            shift[j] = up;
            y_cols.push((j, -1.0));
        } else {
            y_cols.push((j, 1.0));
            y_cols.push((j, -1.0));
        }
        constant += core.objective[j] * shift[j];
    }
    let row_slacks2: Vec<usize> = stage2_rows.iter().copied().filter(|&i| core.rows[i].kind != RowKind::Eq).collect();
    let n2 = y_cols.len() + row_slacks2.len() + ub_rows2.len();
    let m2 = m2_orig + ub_rows2.len();
    let mut d_mat = DenseMatrix::zeros(m2, n2);
    let mut d = vec![0.0; n2];
    let mut xi = vec![0.0; m2];
    let mut tech = DenseMatrix::zeros(m2, n1);
    let mut row_shift = vec![0.0; m2_orig];
    for (li, &i) in stage2_rows.iter().enumerate() {
        for (k, &(j, sign)) in y_cols.iter().enumerate() {
            d_mat[(li, k)] = sign * dense[i][j];
        }
        for j in 0..n1_orig {
            tech[(li, j)] = dense[i][j];
        }
        row_shift[li] = (n1_orig..ncols).map(|j| dense[i][j] * shift[j]).sum();
        xi[li] = core.rhs[i] - row_shift[li];
    }
    for (k, &(j, sign)) in y_cols.iter().enumerate() {
        d[k] = sign * core.objective[j];
    }
    for (k, &i) in row_slacks2.iter().enumerate() {
        let li = i - m1_orig;
        d_mat[(li, y_cols.len() + k)] = if core.rows[i].kind == RowKind::Le { 1.0 } else { -1.0 };
    }
    for (k, &(col, width)) in ub_rows2.iter().enumerate() {
        let row = m2_orig + k;
        d_mat[(row, col)] = 1.0;
        d_mat[(row, y_cols.len() + row_slacks2.len() + k)] = 1.0;
        xi[row] = width;
    }

    let mut entries = Vec::with_capacity(stoch.entries.len());
    for e in &stoch.entries {
        let i = match e.row {
            RowRef::Objective => return Err(unsupported("random objective coefficient")),
            RowRef::Row(i) => i,
        };
        let position = match e.column {
            None if i < m1_orig => return Err(unsupported("random first-stage right-hand side")),
            None => RandomPosition::Rhs(i - m1_orig),
            Some(j) if j >= n1_orig => return Err(unsupported("random recourse matrix entry")),
            Some(_) if i < m1_orig => return Err(unsupported("random first-stage constraint coefficient")),
            Some(j) => RandomPosition::Tech(i - m1_orig, j),
        };
        let values = match position {
            RandomPosition::Rhs(li) => e.values.iter().map(|v| v - row_shift[li]).collect(),
            RandomPosition::Tech(..) => e.values.clone(),
        };
        entries.push(RandomEntry { position, marginal: Marginal::Discrete { values, probs: e.probs.clone() } });
    }

    let problem = TwoStageProblem {
        name: core.name.clone(),
        q: DenseMatrix::zeros(n1, n1),
        c,
        a,
        b,
        lower_bounds: Some(lower),
        d_mat,
        d,
        p: None,
        xi,
        tech,
        stochastics: Stochastics::Independent(entries),
        constant,
        recourse_bounds: None,
    };
    problem.validate().map_err(|e| SmpsError::UnsupportedStructure(e.to_string()))?;
    Ok(problem)
}
