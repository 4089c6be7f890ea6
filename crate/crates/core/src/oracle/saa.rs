//! Sample-average objectives `f_S(x) = c(x) + Σ wᵢ h(x, ωᵢ)` and their
//! subgradients.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::model::{Scenario, ScenarioSet, TwoStageProblem};

use super::recourse::{recourse_subgradient, solve_recourse};
use super::OracleError;

/// Objective value with one subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub subgradient: Vec<f64>,
}

/// A convex function that can be evaluated together with a subgradient.
pub trait Objective {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, OracleError>;
}

/// Below this many distinct scenarios the per-scenario solves run serially.
const PARALLEL_THRESHOLD: usize = 16;

/// Sample-average function over a weighted scenario set.
///
/// Repeated draws of the same support point are solved once. Per-scenario
/// results are accumulated in sample order, so values are reproducible
/// bit for bit regardless of how the solves are scheduled.
pub struct SaaFunction<'a> {
    problem: &'a TwoStageProblem,
    scenarios: ScenarioSet,
    /// Distinct slot of every scenario.
    slot_of: Vec<usize>,
    /// First scenario index of every slot.
    slots: Vec<usize>,
    by_support: HashMap<u64, usize>,
    warm: Vec<Mutex<Option<Vec<usize>>>>,
    last: Mutex<Option<(Vec<f64>, Evaluation)>>,
}

impl<'a> SaaFunction<'a> {
    pub fn new(problem: &'a TwoStageProblem, scenarios: ScenarioSet) -> Self {
        let mut f = Self {
            problem,
            scenarios: ScenarioSet::default(),
            slot_of: Vec::new(),
            slots: Vec::new(),
            by_support: HashMap::new(),
            warm: Vec::new(),
            last: Mutex::new(None),
        };
        f.index(scenarios);
        f
    }

    fn index(&mut self, scenarios: ScenarioSet) {
        self.slot_of.clear();
        for (i, s) in scenarios.iter().enumerate() {
            let slot = match s.support_index {
                Some(key) => match self.by_support.get(&key) {
                    Some(&slot) => slot,
                    None => {
                        self.by_support.insert(key, self.slots.len());
                        self.slots.push(i);
                        self.warm.push(Mutex::new(None));
                        self.slots.len() - 1
                    }
                },
                None => {
                    self.slots.push(i);
                    self.warm.push(Mutex::new(None));
                    self.slots.len() - 1
                }
            };
            self.slot_of.push(slot);
        }
        // Slots created for earlier sets keep their index; re-point them at
        // the first occurrence in the new set.
        let mut first = vec![usize::MAX; self.slots.len()];
        for (i, &slot) in self.slot_of.iter().enumerate() {
            if first[slot] == usize::MAX {
                first[slot] = i;
            }
        }
        self.slots = first;
        self.scenarios = scenarios;
        *self.last.get_mut().expect("cache lock") = None;
    }

    /// Appends draws, reweighting all scenarios to `1/|S|`. Warm-start bases
    /// are kept.
    pub fn extend_uniform(&mut self, more: Vec<Scenario>) {
        let mut set = std::mem::take(&mut self.scenarios);
        set.extend_uniform(more);
        self.index(set);
    }

    pub fn problem(&self) -> &TwoStageProblem {
        self.problem
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// Number of distinct second-stage problems.
    pub fn distinct(&self) -> usize {
        self.slots.iter().filter(|&&i| i != usize::MAX).count()
    }

    /// Per-scenario recourse values and subgradients, in sample order.
    pub fn recourse_terms(&self, x: &[f64]) -> Result<Vec<(f64, Vec<f64>)>, OracleError> {
        let problem = self.problem;
        let solve_slot = |slot: usize| -> Result<(f64, Vec<f64>), OracleError> {
            let first = self.slots[slot];
            let data = &self.scenarios.as_slice()[first].data;
            let mut warm = self.warm[slot].lock().expect("warm-start lock");
            let (sol, basis) = solve_recourse(problem, x, data, warm.as_deref()).map_err(|e| e.with_scenario(first))?;
            *warm = Some(basis);
            Ok((sol.h, recourse_subgradient(data, &sol.pi)))
        };
        let live: Vec<usize> = (0..self.slots.len()).filter(|&s| self.slots[s] != usize::MAX).collect();
        let results: Vec<Result<(f64, Vec<f64>), OracleError>> = if live.len() >= PARALLEL_THRESHOLD {
            live.par_iter().map(|&s| solve_slot(s)).collect()
        } else {
            live.iter().map(|&s| solve_slot(s)).collect()
        };
        let mut per_slot: Vec<Option<(f64, Vec<f64>)>> = vec![None; self.slots.len()];
        for (&s, r) in live.iter().zip(results) {
            per_slot[s] = Some(r?);
        }
        Ok(self.slot_of.iter().map(|&s| per_slot[s].clone().expect("every slot solved")).collect())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(self.evaluate(x)?.value)
    }

    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(self.evaluate(x)?.subgradient)
    }
}

impl Objective for SaaFunction<'_> {
    fn dim(&self) -> usize {
        self.problem.n1()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, OracleError> {
        if x.len() != self.problem.n1() {
            return Err(OracleError::DimensionMismatch { expected: self.problem.n1(), found: x.len() });
        }
        if let Some((cx, ev)) = self.last.lock().expect("cache lock").as_ref() {
            if cx.as_slice() == x {
                return Ok(ev.clone());
            }
        }
        let terms = self.recourse_terms(x)?;
        let mut value = self.problem.first_stage_value(x);
        let mut subgradient = self.problem.first_stage_grad(x);
        let mut expected = 0.0;
        for (s, (h, v)) in self.scenarios.iter().zip(&terms) {
            expected += s.weight * h;
            for (g, vi) in subgradient.iter_mut().zip(v) {
                *g += s.weight * vi;
            }
        }
        value += expected;
        let ev = Evaluation { value, subgradient };
        *self.last.lock().expect("cache lock") = Some((x.to_vec(), ev.clone()));
        Ok(ev)
    }
}
