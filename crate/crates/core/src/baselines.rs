//! Projected stochastic subgradient descent and Euclidean stochastic
//! mirror descent, the reference methods SCS is compared against.
//!
//! Both draw their mini-batches from [`Stream::Batch`], so with equal seeds
//! and batch sizes they see the same scenarios in the same order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::IterateRecord;
use crate::linalg::{norm2, project_affine, project_polyhedral, DenseMatrix, LinalgError};
use crate::model::{ScenarioSampler, Stream, TwoStageProblem};
use crate::oracle::{solve_lp_with_bounds, Objective, OracleError, SaaFunction, SolveStatus};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("invalid baseline parameters: {0}")]
    InvalidParams(String),
    #[error("no feasible first-stage point: {0}")]
    InfeasibleStart(String),
    /// SMD needs the diameter of X; it cannot be derived when X is
    /// unbounded.
    #[error("the first-stage set is unbounded; set `diameter` explicitly")]
    UnboundedFeasibleSet,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Constant,
    /// `c/√k`.
    #[default]
    InvSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Last,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    /// SGD step rule; SMD always uses `θ D_X / (G √k)`.
    pub step_rule: StepRule,
    pub c: f64,
    /// Assumed bound on the subgradient norm, used by SMD.
    pub g_bound: f64,
    /// SMD step multiplier.
    pub theta: f64,
    /// Diameter of X for SMD; `None` derives it from the bounding box.
    pub diameter: Option<f64>,
    pub batch: usize,
    pub iters: usize,
    pub seed: u64,
    /// Which iterate SGD reports; SMD always averages.
    pub averaging: Averaging,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            step_rule: StepRule::InvSqrt,
            c: 0.1,
            g_bound: 10.0,
            theta: 1.0,
            diameter: None,
            batch: 10,
            iters: 100,
            seed: 0,
            averaging: Averaging::Last,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: &str| Err(BaselineError::InvalidParams(m.to_string()));
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad("c must be positive");
        }
        if !(self.g_bound > 0.0) || !self.g_bound.is_finite() {
            return bad("g_bound must be positive");
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return bad("theta must be positive");
        }
        if let Some(d) = self.diameter {
            if !(d > 0.0) || !d.is_finite() {
                return bad("diameter must be positive");
            }
        }
        if self.batch == 0 || self.iters == 0 {
            return bad("batch and iters must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineReport {
    /// The reported iterate: the last one, or the running average.
    pub x: Vec<f64>,
    /// `f_S` is the mini-batch objective at the iterate the subgradient was
    /// taken at; `f_eval` is left NaN for the harness.
    pub history: Vec<IterateRecord>,
    /// Reported iterate after each iteration, aligned with `history`.
    pub iterates: Vec<Vec<f64>>,
}

struct Feasible {
    a: DenseMatrix,
    b: Vec<f64>,
    lower: Vec<f64>,
    bounded: bool,
}

impl Feasible {
    fn new(problem: &TwoStageProblem) -> Self {
        let a = if problem.m1() == 0 { DenseMatrix::zeros(0, problem.n1()) } else { problem.a.clone() };
        Self { a, b: problem.b.clone(), lower: problem.lower_or_free(), bounded: problem.has_bounds() }
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if self.bounded {
            project_polyhedral(&self.a, &self.b, &self.lower, x)
        } else {
            project_affine(&self.a, &self.b, x)
        }
    }

    /// Diagonal of the smallest box containing X, from `2n` LPs.
    fn box_diameter(&self) -> Result<f64, BaselineError> {
        let n = self.lower.len();
        let mut sq = 0.0;
        for i in 0..n {
            let mut cost = vec![0.0; n];
            let mut ends = [0.0; 2];
            for (e, sign) in [1.0, -1.0].into_iter().enumerate() {
                cost[i] = sign;
                let lp = solve_lp_with_bounds(&cost, &self.a, &self.b, &self.lower)?;
                match lp.status {
                    SolveStatus::Optimal => ends[e] = lp.x[i],
                    SolveStatus::Unbounded => return Err(BaselineError::UnboundedFeasibleSet),
                    SolveStatus::Infeasible => return Err(BaselineError::InfeasibleStart("empty first-stage set".into())),
                }
            }
            sq += (ends[1] - ends[0]).powi(2);
        }
        Ok(sq.sqrt())
    }
}

fn run_projected(
    problem: &TwoStageProblem,
    params: &BaselineParams,
    step: impl Fn(usize) -> f64,
    averaging: Averaging,
) -> Result<BaselineReport, BaselineError> {
    let feas = Feasible::new(problem);
    let mut x = feas.project(&vec![0.0; problem.n1()]).map_err(|e| BaselineError::InfeasibleStart(e.to_string()))?;
    let mut avg = x.clone();
    let mut sampler = ScenarioSampler::new(problem, params.seed, Stream::Batch);
    let mut history = Vec::with_capacity(params.iters);
    let mut iterates = Vec::with_capacity(params.iters);
    for k in 1..=params.iters {
        let batch = SaaFunction::new(problem, sampler.sample(params.batch));
        let ev = batch.evaluate(&x)?;
        let alpha = step(k);
        let trial: Vec<f64> = x.iter().zip(&ev.subgradient).map(|(xi, gi)| xi - alpha * gi).collect();
        let next = feas.project(&trial)?;
        let moved = norm2(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = next;
        // Running mean of x_1..x_{k+1}.
        let w = 1.0 / (k + 1) as f64;
        for (a, xi) in avg.iter_mut().zip(&x) {
            *a += w * (xi - *a);
        }
        let reported = match averaging {
            Averaging::Last => x.clone(),
            Averaging::Uniform => avg.clone(),
        };
        history.push(IterateRecord {
            k,
            f_s: ev.value,
            f_eval: f64::NAN,
            d_norm: norm2(&ev.subgradient),
            delta: alpha,
            sample_size: params.batch,
            step_t: moved,
            accepted: true,
            wall_ms: 0,
        });
        iterates.push(reported);
    }
    let x_final = iterates.last().cloned().unwrap_or(x);
    Ok(BaselineReport { x: x_final, history, iterates })
}

/// Projected stochastic subgradient descent with step `c` or `c/√k`.
pub fn sgd_run(problem: &TwoStageProblem, params: &BaselineParams) -> Result<BaselineReport, BaselineError> {
    params.validate()?;
    let (c, rule) = (params.c, params.step_rule);
    let step = move |k: usize| match rule {
        StepRule::Constant => c,
        StepRule::InvSqrt => c / (k as f64).sqrt(),
    };
    run_projected(problem, params, step, params.averaging)
}

/// Euclidean mirror descent: projected steps `θ D_X / (G √k)` and uniform
/// averaging of the iterates.
pub fn smd_run(problem: &TwoStageProblem, params: &BaselineParams) -> Result<BaselineReport, BaselineError> {
    params.validate()?;
    let diameter = match params.diameter {
        Some(d) => d,
        None => Feasible::new(problem).box_diameter()?,
    };
    let scale = params.theta * diameter / params.g_bound;
    run_projected(problem, params, move |k| scale / (k as f64).sqrt(), Averaging::Uniform)
}
