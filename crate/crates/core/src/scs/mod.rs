//! Sampling-based conjugate subgradient (SCS) method.
//!
//! Each iteration combines the previous direction with a fresh subgradient
//! of the current sample-average function, searches along the result
//! inside a trust region, grows the sample, and keeps the step only if an
//! independent replication sample agrees that it decreases the objective.

mod direction;
mod line_search;
mod params;

use std::time::Instant;

use thiserror::Error;

use crate::history::IterateRecord;
use crate::linalg::{
    dot, norm2, norm_inf, null_space_basis, project_affine, project_polyhedral, sub, DenseMatrix, LinalgError, NullSpaceBasis,
    DEFAULT_RANK_TOL,
};
use crate::model::{enumerate_support, ModelError, ScenarioSampler, Stream, TwoStageProblem, SUPPORT_LIMIT};
use crate::oracle::{solve_qp_bound, Evaluation, Objective, OracleError, SaaFunction, SolveStatus};

pub use direction::{
    accept_from_differences, acceptance_test, conjugate_direction, lambda_star, min_norm_weights, sample_requirement, sample_size,
    step_cap, AcceptanceData,
};
pub use line_search::{line_search, FailReason, LineSearch, LineSearchConfig, LineSearchOutcome};
pub use params::{SamplingMode, ScsParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("trust-region radius must be positive")]
    NonPositiveDelta,
    #[error("an active bound blocks the search direction")]
    ZeroCap,
    #[error("no feasible starting point: {0}")]
    InfeasibleStart(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `‖d̃‖ ≤ eps`.
    Converged,
    MaxIterReached,
    /// `Ax = b` alone pins down `x`.
    UniqueFeasiblePoint,
    /// At the smallest trust radius, a memory restart did not change the
    /// direction: no step the recourse solver can resolve decreases `f_S`.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Success,
    Boundary,
    Kink,
    Fail(FailReason),
    ZeroCap,
    /// The loop stopped before searching.
    Skipped,
}

/// Internal quantities of one iteration, kept for testing and analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationDiagnostics {
    pub k: usize,
    pub lambda: f64,
    /// Projected subgradient `g̃`.
    pub g_proj: Vec<f64>,
    /// Projected previous direction entering the combination.
    pub d_prev: Vec<f64>,
    pub direction: Vec<f64>,
    /// `⟨d̃, g̃⟩ + ‖d̃‖²`, which is never positive in exact arithmetic.
    pub descent_residual: f64,
    /// The previous direction was dropped because it pointed through a
    /// bound that the projection released.
    pub memory_reset: bool,
    pub step: StepStatus,
    pub acceptance: Option<AcceptanceData>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// In-sample objective at `x` on the final sample.
    pub value: f64,
    pub x0: Vec<f64>,
    pub history: Vec<IterateRecord>,
    /// Incumbent after each iteration, aligned with `history`.
    pub iterates: Vec<Vec<f64>>,
    pub diagnostics: Vec<IterationDiagnostics>,
    /// Every line-search trial point, when requested.
    pub trial_points: Vec<Vec<f64>>,
    pub termination: Termination,
    pub kappa: f64,
    pub bounds: (f64, f64),
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Feasible starting point: the projection of the origin onto X.
pub fn starting_point(problem: &TwoStageProblem) -> Result<Vec<f64>, ScsError> {
    let zero = vec![0.0; problem.n1()];
    let a = constraint_matrix(problem);
    let r = if problem.has_bounds() {
        project_polyhedral(&a, &problem.b, &problem.lower_or_free(), &zero)
    } else {
        project_affine(&a, &problem.b, &zero)
    };
    r.map_err(|e| ScsError::InfeasibleStart(e.to_string()))
}

fn constraint_matrix(problem: &TwoStageProblem) -> DenseMatrix {
    if problem.m1() == 0 {
        DenseMatrix::zeros(0, problem.n1())
    } else {
        problem.a.clone()
    }
}

fn active_tol(lb: f64) -> f64 {
    1e-10 * (1.0 + lb.abs())
}

/// Face of X on which the next step moves: the bounds active at `x` that
/// the projection of `−g` onto the tangent cone keeps active.
struct Face {
    /// `None` when the face is a single point.
    basis: Option<NullSpaceBasis>,
    held: Vec<usize>,
    /// Active at `x` but released by the projection.
    released: Vec<usize>,
}

impl Face {
    fn new(a: &DenseMatrix, n: usize, held: Vec<usize>, released: Vec<usize>) -> Result<Self, ScsError> {
        let mut rows = a.clone();
        if !held.is_empty() {
            let mut e = DenseMatrix::zeros(held.len(), n);
            for (r, &i) in held.iter().enumerate() {
                e[(r, i)] = 1.0;
            }
            rows = if a.rows() == 0 { e } else { a.vstack(&e)? };
        }
        let basis = match null_space_basis(&rows, DEFAULT_RANK_TOL) {
            Ok(b) => Some(b),
            Err(LinalgError::EmptyNullSpace) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(Self { basis, held, released })
    }

    /// `Z Zᵀ v` with held coordinates set to exactly zero.
    fn project(&self, v: &[f64]) -> Result<Vec<f64>, ScsError> {
        let mut out = match &self.basis {
            Some(b) => b.project(v)?,
            None => vec![0.0; v.len()],
        };
        for &i in &self.held {
            out[i] = 0.0;
        }
        Ok(out)
    }

    /// Moves released coordinates along which `d` points outward into the
    /// held set. Returns whether anything moved.
    fn hold_blocking(&mut self, a: &DenseMatrix, d: &[f64]) -> Result<bool, ScsError> {
        let (block, keep): (Vec<usize>, Vec<usize>) = self.released.iter().partition(|&&i| d[i] < 0.0);
        if block.is_empty() {
            return Ok(false);
        }
        let mut held = std::mem::take(&mut self.held);
        held.extend(block);
        held.sort_unstable();
        *self = Face::new(a, d.len(), held, keep)?;
        Ok(true)
    }
}

fn face_at(a: &DenseMatrix, base: &Option<NullSpaceBasis>, lower: &[f64], x: &[f64], g: &[f64]) -> Result<Face, ScsError> {
    let n = x.len();
    let near: Vec<usize> = (0..n).filter(|&i| lower[i].is_finite() && x[i] - lower[i] <= active_tol(lower[i])).collect();
    if near.is_empty() {
        return Ok(Face { basis: base.clone(), held: Vec::new(), released: Vec::new() });
    }
    let mut cone_lower = vec![f64::NEG_INFINITY; n];
    for &i in &near {
        cone_lower[i] = 0.0;
    }
    let sol = solve_qp_bound(&DenseMatrix::identity(n), g, a, &vec![0.0; a.rows()], &cone_lower)?;
    if sol.status != SolveStatus::Optimal {
        return Err(ScsError::Oracle(OracleError::NumericalBreakdown("tangent cone projection failed".into())));
    }
    let scale = 1e-12 * (1.0 + norm2(g));
    let (held, released): (Vec<usize>, Vec<usize>) = near.into_iter().partition(|&i| sol.y[i] <= scale);
    Face::new(a, n, held, released)
}

/// Pilot estimates at `x0`: largest per-scenario subgradient norm and the
/// range of observed recourse values.
fn pilot(problem: &TwoStageProblem, params: &ScsParams, x0: &[f64]) -> Result<(f64, f64, f64), ScsError> {
    let mut sampler = ScenarioSampler::new(problem, params.seed, Stream::Pilot);
    let f = SaaFunction::new(problem, sampler.sample(params.pilot_size));
    let terms = f.recourse_terms(x0)?;
    let base = problem.first_stage_grad(x0);
    let mut lip: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (h, v) in &terms {
        let g: Vec<f64> = base.iter().zip(v).map(|(a, b)| a + b).collect();
        lip = lip.max(norm2(&g));
        lo = lo.min(*h);
        hi = hi.max(*h);
    }
    Ok((lip, lo, hi))
}

fn snap_to_bounds(x: &mut [f64], lower: &[f64], block: Option<usize>, t: f64, t_cap: f64) {
    if let Some(b) = block {
        if t >= t_cap {
            x[b] = lower[b];
        }
    }
    for (xi, lb) in x.iter_mut().zip(lower) {
        if *xi < *lb {
            *xi = *lb;
        }
    }
}

/// Runs SCS from the projection of the origin onto X.
pub fn run(problem: &TwoStageProblem, params: &ScsParams) -> Result<SolveReport, ScsError> {
    params.validate()?;
    problem.validate()?;
    let x0 = starting_point(problem)?;
    run_from(problem, params, x0)
}

/// Runs SCS from a given feasible point.
pub fn run_from(problem: &TwoStageProblem, params: &ScsParams, x0: Vec<f64>) -> Result<SolveReport, ScsError> {
    params.validate()?;
    let clock = Instant::now();
    let n = problem.n1();
    if x0.len() != n {
        return Err(ScsError::Oracle(OracleError::DimensionMismatch { expected: n, found: x0.len() }));
    }
    let a = constraint_matrix(problem);
    let lower = problem.lower_or_free();
    let base = match null_space_basis(&a, DEFAULT_RANK_TOL) {
        Ok(b) => Some(b),
        Err(LinalgError::EmptyNullSpace) => None,
        Err(e) => return Err(e.into()),
    };

    let need_pilot =
        params.kappa.is_none() || (problem.recourse_bounds.is_none() && (params.bound_lo.is_none() || params.bound_hi.is_none()));
    let pilot_est = if need_pilot { Some(pilot(problem, params, &x0)?) } else { None };
    let kappa = params.kappa.unwrap_or_else(|| {
        let lip = pilot_est.map_or(0.0, |p| p.0);
        (4.0 * lip / params.delta0).max(1.0)
    });
    let declared = problem.recourse_bounds;
    let bound_lo = params.bound_lo.or(declared.map(|b| b.0)).or(pilot_est.map(|p| p.1)).unwrap_or(0.0);
    let bound_hi = params.bound_hi.or(declared.map(|b| b.1)).or(pilot_est.map(|p| p.2)).unwrap_or(0.0);
    let range = (bound_hi - bound_lo).max(0.0);

    let mut report = SolveReport {
        x: x0.clone(),
        value: f64::NAN,
        x0: x0.clone(),
        history: Vec::new(),
        iterates: Vec::new(),
        diagnostics: Vec::new(),
        trial_points: Vec::new(),
        termination: Termination::MaxIterReached,
        kappa,
        bounds: (bound_lo, bound_hi),
    };

    let full = params.sampling == SamplingMode::FullSupport;
    let mut main = ScenarioSampler::new(problem, params.seed, Stream::Main);
    let initial = if full {
        enumerate_support(problem, SUPPORT_LIMIT)?
    } else {
        main.sample(sample_size(params.kappa_eps, range, kappa, params.delta0, params.max_sample)?)
    };
    let mut s_fn = SaaFunction::new(problem, initial);

    if base.is_none() {
        report.value = s_fn.evaluate(&x0)?.value;
        report.termination = Termination::UniqueFeasiblePoint;
        return Ok(report);
    }

    let mut x_hat = x0;
    let mut delta = params.delta0;
    let mut d_prev = vec![0.0; n];
    let first = s_fn.evaluate(&x_hat)?;
    let mut f_hat = first.value;
    // Point whose subgradient enters the next direction, with its
    // evaluation when that was computed on the current sample. Reusing the
    // evaluation matters at kinks, where a fresh solve may return a
    // different dual.
    let mut g_source: (Vec<f64>, Option<Evaluation>) = (x_hat.clone(), Some(first));

    // Largest distance from x̂ of a point whose subgradient is still part
    // of `d_prev`.
    let mut radius = 0.0;
    // Set by a restart at the radius floor, cleared by any change of state.
    let mut restarted_at_floor = false;
    // Raw subgradients met in null steps at the current x̂, with their
    // distance from it.
    let mut bundle: Vec<(Vec<f64>, f64)> = Vec::new();

    for k in 1..=params.max_iter {
        let g_dist = norm2(&sub(&g_source.0, &x_hat));
        let g = match g_source.1.take() {
            Some(ev) => ev.subgradient,
            None => s_fn.evaluate(&g_source.0)?.subgradient,
        };
        let mut face = face_at(&a, &base, &lower, &x_hat, &g)?;
        let mut memory_reset = false;
        let (g_proj, dp, d, lambda, bundle_dist) = loop {
            let g_proj = face.project(&g)?;
            let dp = face.project(&d_prev)?;
            let (d, lambda, bundle_dist) = if bundle.is_empty() {
                let (d, lambda) = conjugate_direction(&g_proj, &dp);
                (d, lambda, 0.0)
            } else {
                bundle_direction(&face, &g_proj, &dp, &bundle)?
            };
            if !face.released.iter().any(|&i| d[i] < 0.0) {
                break (g_proj, dp, d, lambda, bundle_dist);
            }
            memory_reset = true;
            let steepest: Vec<f64> = g_proj.iter().map(|v| -v).collect();
            if !face.hold_blocking(&a, &steepest)? {
                break (g_proj, dp, steepest, 0.0, 0.0);
            }
        };
        if memory_reset {
            bundle.clear();
        }
        let d_norm = norm2(&d);
        radius = if lambda == 0.0 {
            g_dist
        } else if lambda < 1.0 {
            radius.max(g_dist)
        } else {
            radius
        };
        radius = radius.max(bundle_dist);
        let mut diag = IterationDiagnostics {
            k,
            lambda,
            descent_residual: dot(&d, &g_proj) + d_norm * d_norm,
            g_proj,
            d_prev: dp,
            direction: d.clone(),
            memory_reset,
            step: StepStatus::Skipped,
            acceptance: None,
        };

        let wall = |c: &Instant| if params.timing { c.elapsed().as_millis() as u64 } else { 0 };
        if d_norm <= params.eps && radius > params.memory_radius {
            // The short direction aggregates subgradients from too far
            // away to certify x̂; restart the memory at x̂.
            diag.memory_reset = true;
            report.history.push(IterateRecord {
                k,
                f_s: f_hat,
                f_eval: f64::NAN,
                d_norm,
                delta,
                sample_size: s_fn.len(),
                step_t: 0.0,
                accepted: false,
                wall_ms: wall(&clock),
            });
            report.iterates.push(x_hat.clone());
            report.diagnostics.push(diag);
            d_prev = vec![0.0; n];
            radius = 0.0;
            bundle.clear();
            g_source = (x_hat.clone(), None);
            continue;
        }
        if d_norm <= params.eps {
            report.history.push(IterateRecord {
                k,
                f_s: f_hat,
                f_eval: f64::NAN,
                d_norm,
                delta,
                sample_size: s_fn.len(),
                step_t: 0.0,
                accepted: false,
                wall_ms: wall(&clock),
            });
            report.iterates.push(x_hat.clone());
            report.diagnostics.push(diag);
            report.termination = Termination::Converged;
            break;
        }

        // Line search on f_{k-1}.
        let mut search = None;
        let mut cap = None;
        match step_cap(&x_hat, &d, delta, &lower) {
            Ok((t_max, block)) => {
                let cfg = LineSearchConfig {
                    m1: params.m1,
                    m2: params.m2,
                    t_max,
                    max_bisections: params.max_bisections,
                    resolution: params.resolution,
                };
                let ls = line_search(&s_fn, &x_hat, f_hat, &d, cfg)?;
                diag.step = match &ls.outcome {
                    LineSearchOutcome::Success { .. } => StepStatus::Success,
                    LineSearchOutcome::Boundary { .. } => StepStatus::Boundary,
                    LineSearchOutcome::Kink { .. } => StepStatus::Kink,
                    LineSearchOutcome::Fail(r) => StepStatus::Fail(*r),
                };
                if params.record_trial_points {
                    report.trial_points.extend(ls.trial_points.iter().cloned());
                }
                cap = Some((t_max, block));
                search = Some(ls);
            }
            Err(ScsError::ZeroCap) => diag.step = StepStatus::ZeroCap,
            Err(e) => return Err(e),
        }

        // Grow S and draw T. Once the size rule asks for more than
        // `max_sample`, S is frozen and the accuracy guarantee behind the
        // replication test no longer holds, so the test reduces to the
        // in-sample decrease and the run finishes on the frozen SAA.
        let s_len = s_fn.len();
        let t_fn = if full {
            None
        } else {
            let target = sample_size(params.kappa_eps, range, kappa, delta, params.max_sample)?;
            if target > s_fn.len() {
                s_fn.extend_uniform(main.draw(target - s_fn.len()));
            }
            if sample_requirement(params.kappa_eps, range, kappa, delta)? > params.max_sample as f64 {
                None
            } else {
                let mut rep = ScenarioSampler::new(problem, params.seed, Stream::Replication(k as u64));
                Some(SaaFunction::new(problem, rep.sample(s_fn.len())))
            }
        };
        let f_prev_s = s_fn.evaluate(&x_hat)?.value;

        let same_sample = s_len == s_fn.len();
        let candidate = search.as_ref().and_then(|ls| ls.outcome.candidate().map(|(t, x, ev)| (t, x.to_vec(), ev.clone())));
        let mut accepted = false;
        let mut step_t = 0.0;
        let mut next_g = None;
        let mut norm_only = false;
        if let Some((t, mut xc, ev_ls)) = candidate {
            let (t_max, block) = cap.expect("capped when searched");
            snap_to_bounds(&mut xc, &lower, block, t, t_max);
            let ev_cand = s_fn.evaluate(&xc)?;
            let f_cand_s = ev_cand.value;
            let diff_s = f_cand_s - f_prev_s;
            let diff_t = match &t_fn {
                Some(tf) => tf.evaluate(&xc)?.value - tf.evaluate(&x_hat)?.value,
                None => diff_s,
            };
            let data = AcceptanceData { in_sample: diff_s, replication: diff_t };
            diag.acceptance = Some(data);
            accepted = accept_from_differences(data, d_norm, params.eta1, params.eta2, delta);
            if accepted {
                radius += norm2(&sub(&xc, &x_hat));
                x_hat = xc.clone();
                f_hat = f_cand_s;
                step_t = t;
                next_g = Some((xc, Some(ev_cand)));
                if diag.step == StepStatus::Kink && same_sample {
                    // Continue with the subgradient from across the kink.
                    if let Some((xu, eu)) = search.as_ref().and_then(|ls| ls.upper.clone()) {
                        next_g = Some((xu, Some(eu)));
                    }
                }
            } else if accept_from_differences(data, d_norm, params.eta1, params.eta2, 0.0) {
                // Only the norm test failed. The step decreased f, so the
                // trial point says nothing new about x̂: keep the direction
                // and let δ shrink.
                norm_only = true;
            } else {
                let ev = same_sample.then_some(ev_ls);
                next_g = Some((xc, ev));
            }
        }
        let delta_floor = params.resolution * (1.0 + norm_inf(&x_hat));
        // A rejection at the floor that leaves the direction untouched
        // would repeat forever.
        let fixed_point = !accepted && delta <= delta_floor && lambda == 1.0 && same_sample;
        if accepted {
            delta = (params.gamma * delta).min(params.delta_max);
        } else {
            f_hat = f_prev_s;
            delta = (delta / params.gamma).max(delta_floor);
        }
        g_source = if norm_only {
            (x_hat.clone(), None)
        } else {
            next_g
                .or_else(|| search.and_then(|ls| ls.upper).map(|(x, ev)| (x, same_sample.then_some(ev))))
                .unwrap_or_else(|| (x_hat.clone(), None))
        };
        d_prev = d;
        if accepted || !same_sample {
            bundle.clear();
        } else if params.null_step_bundle > 0 && !norm_only {
            if bundle.len() == params.null_step_bundle {
                bundle.remove(0);
            }
            bundle.push((g, g_dist));
        }
        let stalled = fixed_point && restarted_at_floor;
        if fixed_point && !stalled {
            diag.memory_reset = true;
            d_prev = vec![0.0; n];
            radius = 0.0;
            bundle.clear();
            g_source = (x_hat.clone(), None);
            restarted_at_floor = true;
        } else if accepted || (lambda > 0.0 && lambda < 1.0) || !same_sample {
            restarted_at_floor = false;
        }

        report.history.push(IterateRecord {
            k,
            f_s: f_hat,
            f_eval: f64::NAN,
            d_norm,
            delta,
            sample_size: s_fn.len(),
            step_t,
            accepted,
            wall_ms: wall(&clock),
        });
        report.iterates.push(x_hat.clone());
        report.diagnostics.push(diag);
        if stalled {
            report.termination = Termination::Stalled;
            break;
        }
    }

    report.value = f_hat;
    report.x = x_hat;
    Ok(report)
}

/// Negative min-norm point of the projected previous direction, the new
/// projected subgradient and the projected null-step bundle. Returns the
/// direction, the weight not on the new subgradient, and the largest
/// distance from x̂ of a bundle entry that got weight.
fn bundle_direction(face: &Face, g_proj: &[f64], dp: &[f64], bundle: &[(Vec<f64>, f64)]) -> Result<(Vec<f64>, f64, f64), ScsError> {
    let mut vs = vec![g_proj.to_vec()];
    let with_prev = dp.iter().any(|v| *v != 0.0);
    if with_prev {
        vs.push(dp.iter().map(|v| -v).collect());
    }
    let first_bundle = vs.len();
    for (b, _) in bundle {
        vs.push(face.project(b)?);
    }
    let w = min_norm_weights(&vs)?;
    let d: Vec<f64> = (0..g_proj.len()).map(|j| -vs.iter().zip(&w).map(|(v, wi)| wi * v[j]).sum::<f64>()).collect();
    let dist = bundle.iter().zip(&w[first_bundle..]).filter(|(_, wi)| **wi > 0.0).map(|((_, r), _)| *r).fold(0.0, f64::max);
    Ok((d, 1.0 - w[0], dist))
}
