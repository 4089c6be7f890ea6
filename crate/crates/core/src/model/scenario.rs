use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::DenseMatrix;

use super::problem::{pick, RandomPosition, Stochastics, TwoStageProblem};
use super::ModelError;

/// Default cap on enumerated support sizes.
pub const SUPPORT_LIMIT: u64 = 100_000;

/// Realized second-stage data `(ξ(ω), C(ω))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioData {
    pub xi: Vec<f64>,
    pub tech: Arc<DenseMatrix>,
}

/// A realization with its weight. Scenarios drawn from a finite support
/// carry the index of their support point, which lets the oracle solve
/// repeated draws once.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub data: Arc<ScenarioData>,
    pub weight: f64,
    pub support_index: Option<u64>,
}

impl Scenario {
    pub fn xi(&self) -> &[f64] {
        &self.data.xi
    }

    pub fn tech(&self) -> &DenseMatrix {
        &self.data.tech
    }
}

/// Weighted scenario collection; weights sum to one.
#[derive(Debug, Clone, Default)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self, ModelError> {
        if scenarios.is_empty() {
            return Err(ModelError::InvalidDistribution("empty scenario set".into()));
        }
        if scenarios.iter().any(|s| !(s.weight > 0.0 && s.weight.is_finite())) {
            return Err(ModelError::InvalidDistribution("scenario weights must be positive".into()));
        }
        let total: f64 = scenarios.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-12 * scenarios.len().max(1) as f64 {
            return Err(ModelError::InvalidDistribution(format!("scenario weights sum to {total}")));
        }
        Ok(Self { scenarios })
    }

    /// Equal weights `1/n`.
    pub fn uniform(mut scenarios: Vec<Scenario>) -> Self {
        let w = 1.0 / scenarios.len().max(1) as f64;
        for s in &mut scenarios {
            s.weight = w;
        }
        Self { scenarios }
    }

    /// Appends draws and resets all weights to `1/n`.
    pub fn extend_uniform(&mut self, more: Vec<Scenario>) {
        self.scenarios.extend(more);
        let w = 1.0 / self.scenarios.len().max(1) as f64;
        for s in &mut self.scenarios {
            s.weight = w;
        }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Scenario> {
        self.scenarios.iter()
    }

    pub fn as_slice(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn get(&self, i: usize) -> Option<&Scenario> {
        self.scenarios.get(i)
    }
}

/// Independent random substreams. Each stream is a separate ChaCha stream
/// under the same seed, so draws for one purpose never shift another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// The cumulative sample S.
    Main,
    /// The replication sample T at iteration k.
    Replication(u64),
    /// Held-out evaluation sample.
    Evaluation,
    /// Baseline mini-batches.
    Batch,
    /// Pilot sample used to pick default parameters.
    Pilot,
}

impl Stream {
    pub fn id(self) -> u64 {
        const SHIFT: u32 = 40;
        match self {
            Stream::Main => 1 << SHIFT,
            Stream::Replication(k) => (2 << SHIFT) | (k & ((1 << SHIFT) - 1)),
            Stream::Evaluation => 3 << SHIFT,
            Stream::Batch => 4 << SHIFT,
            Stream::Pilot => 5 << SHIFT,
        }
    }
}

/// Seeded, single-owner sampler of i.i.d. scenarios.
pub struct ScenarioSampler<'a> {
    problem: &'a TwoStageProblem,
    seed: u64,
    stream: Stream,
    rng: ChaCha8Rng,
    base_tech: Arc<DenseMatrix>,
    cache: HashMap<u64, Arc<ScenarioData>>,
}

impl<'a> ScenarioSampler<'a> {
    pub fn new(problem: &'a TwoStageProblem, seed: u64, stream: Stream) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream.id());
        Self { problem, seed, stream, rng, base_tech: Arc::new(problem.tech.clone()), cache: HashMap::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> Stream {
        self.stream
    }

    /// `n` i.i.d. draws with weights `1/n`.
    pub fn sample(&mut self, n: usize) -> ScenarioSet {
        ScenarioSet::uniform(self.draw(n))
    }

    /// `n` i.i.d. draws; weights are left at `1/n`, callers that merge
    /// draws reweight.
    pub fn draw(&mut self, n: usize) -> Vec<Scenario> {
        let w = 1.0 / n.max(1) as f64;
        (0..n).map(|_| self.draw_one(w)).collect()
    }

    fn draw_one(&mut self, weight: f64) -> Scenario {
        let problem = self.problem;
        match &problem.stochastics {
            Stochastics::Independent(entries) => {
                if entries.iter().all(|e| e.marginal.is_discrete()) {
                    let mut index = 0u64;
                    for e in entries {
                        let (_, atom) = e.marginal.draw(&mut self.rng);
                        let len = e.marginal.support_len().unwrap_or(1) as u64;
                        index = index.saturating_mul(len).saturating_add(atom.unwrap_or(0) as u64);
                    }
                    let data = self.cached(index);
                    Scenario { data, weight, support_index: Some(index) }
                } else {
                    let values: Vec<f64> = entries.iter().map(|e| e.marginal.draw(&mut self.rng).0).collect();
                    let data = Arc::new(realize_independent(problem, &self.base_tech, &values));
                    Scenario { data, weight, support_index: None }
                }
            }
            Stochastics::Scenarios(list) => {
                let probs: Vec<f64> = list.iter().map(|s| s.prob).collect();
                let i = pick(&probs, rand::Rng::random::<f64>(&mut self.rng)) as u64;
                let data = self.cached(i);
                Scenario { data, weight, support_index: Some(i) }
            }
        }
    }

    fn cached(&mut self, index: u64) -> Arc<ScenarioData> {
        if let Some(d) = self.cache.get(&index) {
            return d.clone();
        }
        let d = Arc::new(support_point(self.problem, &self.base_tech, index));
        self.cache.insert(index, d.clone());
        d
    }
}

fn realize_independent(problem: &TwoStageProblem, base_tech: &Arc<DenseMatrix>, values: &[f64]) -> ScenarioData {
    let Stochastics::Independent(entries) = &problem.stochastics else {
        unreachable!("independent realization requested for a scenario list")
    };
    let mut xi = problem.xi.clone();
    let mut tech: Option<DenseMatrix> = None;
    for (e, &v) in entries.iter().zip(values) {
        match e.position {
            RandomPosition::Rhs(i) => xi[i] = v,
            RandomPosition::Tech(i, j) => {
                tech.get_or_insert_with(|| (**base_tech).clone())[(i, j)] = v;
            }
        }
    }
    ScenarioData { xi, tech: tech.map(Arc::new).unwrap_or_else(|| base_tech.clone()) }
}

/// Data of support point `index` (mixed-radix over independent discrete
/// marginals, first entry most significant; or the index into a scenario
/// list).
fn support_point(problem: &TwoStageProblem, base_tech: &Arc<DenseMatrix>, index: u64) -> ScenarioData {
    match &problem.stochastics {
        Stochastics::Independent(entries) => {
            let mut rem = index;
            let mut values = vec![0.0; entries.len()];
            for (k, e) in entries.iter().enumerate().rev() {
                let super::problem::Marginal::Discrete { values: atoms, .. } = &e.marginal else {
                    unreachable!("support point of a continuous marginal")
                };
                let len = atoms.len() as u64;
                values[k] = atoms[(rem % len) as usize];
                rem /= len;
            }
            realize_independent(problem, base_tech, &values)
        }
        Stochastics::Scenarios(list) => {
            let spec = &list[index as usize];
            let mut xi = problem.xi.clone();
            for &(i, v) in &spec.rhs {
                xi[i] = v;
            }
            let tech = if spec.tech.is_empty() {
                base_tech.clone()
            } else {
                let mut t = (**base_tech).clone();
                for &(i, j, v) in &spec.tech {
                    t[(i, j)] = v;
                }
                Arc::new(t)
            };
            ScenarioData { xi, tech }
        }
    }
}

fn support_prob(problem: &TwoStageProblem, index: u64) -> f64 {
    match &problem.stochastics {
        Stochastics::Independent(entries) => {
            let mut rem = index;
            let mut p = 1.0;
            for e in entries.iter().rev() {
                let super::problem::Marginal::Discrete { probs, .. } = &e.marginal else { unreachable!() };
                let len = probs.len() as u64;
                p *= probs[(rem % len) as usize];
                rem /= len;
            }
            p
        }
        Stochastics::Scenarios(list) => list[index as usize].prob,
    }
}

/// Every support point with its exact probability. Zero-probability atoms
/// are dropped; weights are renormalized to absorb rounding.
pub fn enumerate_support(problem: &TwoStageProblem, limit: u64) -> Result<ScenarioSet, ModelError> {
    let size = problem.stochastics.support_size().ok_or(ModelError::InfiniteSupport)?;
    if size > limit {
        return Err(ModelError::SupportTooLarge { size, limit });
    }
    let base = Arc::new(problem.tech.clone());
    let mut list = Vec::with_capacity(size as usize);
    for idx in 0..size {
        let p = support_prob(problem, idx);
        if p > 0.0 {
            list.push(Scenario { data: Arc::new(support_point(problem, &base, idx)), weight: p, support_index: Some(idx) });
        }
    }
    let total: f64 = list.iter().map(|s| s.weight).sum();
    for s in &mut list {
        s.weight /= total;
    }
    ScenarioSet::new(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::problem::{Marginal, RandomEntry};

    fn problem(stoch: Stochastics) -> TwoStageProblem {
        TwoStageProblem {
            name: "t".into(),
            q: DenseMatrix::zeros(1, 1),
            c: vec![0.0],
            a: DenseMatrix::zeros(0, 1),
            b: vec![],
            lower_bounds: None,
            d_mat: DenseMatrix::identity(1),
            d: vec![1.0],
            p: None,
            xi: vec![0.0],
            tech: DenseMatrix::zeros(1, 1),
            stochastics: stoch,
            constant: 0.0,
            recourse_bounds: None,
        }
    }

    fn coin() -> Stochastics {
        Stochastics::Independent(vec![RandomEntry {
            position: RandomPosition::Rhs(0),
            marginal: Marginal::Discrete { values: vec![0.0, 1.0], probs: vec![0.5, 0.5] },
        }])
    }

    #[test]
    fn single_support_point() {
        let p = problem(Stochastics::Independent(vec![RandomEntry {
            position: RandomPosition::Rhs(0),
            marginal: Marginal::Discrete { values: vec![4.0], probs: vec![1.0] },
        }]));
        let s = ScenarioSampler::new(&p, 1, Stream::Main).sample(1);
        assert_eq!(s.len(), 1);
        assert_eq!(s.as_slice()[0].xi(), &[4.0]);
        assert_eq!(s.as_slice()[0].weight, 1.0);
    }

    #[test]
    fn same_seed_same_stream() {
        let p = problem(coin());
        let a = ScenarioSampler::new(&p, 7, Stream::Main).sample(100);
        let b = ScenarioSampler::new(&p, 7, Stream::Main).sample(100);
        let xa: Vec<f64> = a.iter().map(|s| s.xi()[0]).collect();
        let xb: Vec<f64> = b.iter().map(|s| s.xi()[0]).collect();
        assert_eq!(xa, xb);
        let c = ScenarioSampler::new(&p, 7, Stream::Replication(1)).sample(100);
        let xc: Vec<f64> = c.iter().map(|s| s.xi()[0]).collect();
        assert_ne!(xa, xc);
    }

    #[test]
    fn coin_mean_within_three_sigma() {
        let p = problem(coin());
        let s = ScenarioSampler::new(&p, 11, Stream::Main).sample(10_000);
        let mean: f64 = s.iter().map(|s| s.xi()[0]).sum::<f64>() / 10_000.0;
        assert!((0.47..=0.53).contains(&mean), "{mean}");
    }

    #[test]
    fn enumerated_support_matches_product() {
        let e = |i, vals: [f64; 3]| RandomEntry {
            position: RandomPosition::Rhs(i),
            marginal: Marginal::Discrete { values: vals.to_vec(), probs: vec![0.3, 0.4, 0.3] },
        };
        let mut p = problem(Stochastics::Independent(vec![e(0, [1.0, 2.0, 3.0])]));
        p.xi = vec![0.0, 0.0];
        p.d_mat = DenseMatrix::identity(2);
        p.d = vec![1.0, 1.0];
        p.tech = DenseMatrix::zeros(2, 1);
        p.stochastics = Stochastics::Independent(vec![e(0, [1.0, 2.0, 3.0]), e(1, [10.0, 20.0, 30.0])]);
        let set = enumerate_support(&p, SUPPORT_LIMIT).unwrap();
        assert_eq!(set.len(), 9);
        let s5 = set.get(5).unwrap();
        assert_eq!(s5.xi(), &[2.0, 30.0]);
        assert!((s5.weight - 0.12).abs() < 1e-15);
        // sampled index agrees with enumerated data
        let mut sampler = ScenarioSampler::new(&p, 3, Stream::Main);
        for s in sampler.draw(50) {
            let idx = s.support_index.unwrap() as usize;
            assert_eq!(s.xi(), set.get(idx).unwrap().xi());
        }
    }
}
