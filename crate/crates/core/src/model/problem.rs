use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::linalg::{dot, Cholesky, DenseMatrix};

use super::ModelError;

/// Location of a random entry in the second-stage data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RandomPosition {
    /// Entry `i` of ξ.
    Rhs(usize),
    /// Entry `(i, j)` of the technology matrix C.
    Tech(usize, usize),
}

/// Marginal distribution of one random entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, std: f64 },
}

impl Marginal {
    pub fn is_discrete(&self) -> bool {
        matches!(self, Marginal::Discrete { .. })
    }

    pub fn support_len(&self) -> Option<usize> {
        match self {
            Marginal::Discrete { values, .. } => Some(values.len()),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::Discrete { values, probs } => dot(values, probs),
            Marginal::Uniform { lo, hi } => 0.5 * (lo + hi),
            Marginal::Normal { mean, .. } => *mean,
        }
    }

    /// Draws a value; for discrete marginals also returns the atom index.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, Option<usize>) {
        match self {
            Marginal::Discrete { values, probs } => {
                let i = pick(probs, rng.random::<f64>());
                (values[i], Some(i))
            }
            Marginal::Uniform { lo, hi } => (lo + (hi - lo) * rng.random::<f64>(), None),
            Marginal::Normal { mean, std } => {
                let n = Normal::new(*mean, *std).expect("validated normal marginal");
                (n.sample(rng), None)
            }
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match self {
            Marginal::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(ModelError::InvalidDistribution("discrete marginal needs matching values and probabilities".into()));
                }
                if values.iter().chain(probs).any(|v| !v.is_finite()) || probs.iter().any(|p| *p < 0.0) {
                    return Err(ModelError::InvalidDistribution("discrete marginal has invalid entries".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(ModelError::InvalidDistribution(format!("probabilities sum to {total}")));
                }
            }
            Marginal::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(ModelError::InvalidDistribution("uniform marginal needs lo <= hi".into()));
                }
            }
            Marginal::Normal { mean, std } => {
                if !(mean.is_finite() && std.is_finite() && *std >= 0.0) {
                    return Err(ModelError::InvalidDistribution("normal marginal needs std >= 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// Index `i` with `Σ_{j<i} p_j ≤ u < Σ_{j≤i} p_j`; the last atom absorbs
/// rounding.
pub(crate) fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomEntry {
    pub position: RandomPosition,
    pub marginal: Marginal,
}

/// One explicitly listed scenario: overrides of the base ξ and C.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub prob: f64,
    pub rhs: Vec<(usize, f64)>,
    pub tech: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stochastics {
    /// Independent marginals; an empty list means a deterministic problem.
    Independent(Vec<RandomEntry>),
    /// A finite list of joint scenarios.
    Scenarios(Vec<ScenarioSpec>),
}

impl Stochastics {
    pub fn deterministic() -> Self {
        Stochastics::Independent(Vec::new())
    }

    /// Number of support points, or `None` for continuous distributions.
    /// Saturates at `u64::MAX`.
    pub fn support_size(&self) -> Option<u64> {
        match self {
            Stochastics::Independent(entries) => {
                entries.iter().try_fold(1u64, |acc, e| e.marginal.support_len().map(|n| acc.saturating_mul(n as u64)))
            }
            Stochastics::Scenarios(list) => Some(list.len() as u64),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.support_size().is_some()
    }
}

/// Two-stage stochastic program
///
/// ```text
/// min ½xᵀQx + cᵀx + E[h(x, ω)]   s.t. A x = b, x ≥ lower
/// h(x, ω) = min dᵀy (+ ½yᵀPy)    s.t. D y = ξ(ω) − C(ω) x, y ≥ 0
/// ```
///
/// `xi` and `tech` hold the base values of ξ and C; entries named in
/// `stochastics` are replaced by their realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageProblem {
    pub name: String,
    pub q: DenseMatrix,
    pub c: Vec<f64>,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    /// `None` means x is free; individual entries may be `-inf`.
    pub lower_bounds: Option<Vec<f64>>,
    pub d_mat: DenseMatrix,
    pub d: Vec<f64>,
    pub p: Option<DenseMatrix>,
    pub xi: Vec<f64>,
    pub tech: DenseMatrix,
    pub stochastics: Stochastics,
    /// Constant added to the first-stage objective.
    pub constant: f64,
    /// Declared bounds `m ≤ h(x, ω) ≤ M` on the recourse value.
    pub recourse_bounds: Option<(f64, f64)>,
}

impl TwoStageProblem {
    pub fn n1(&self) -> usize {
        self.c.len()
    }

    pub fn n2(&self) -> usize {
        self.d.len()
    }

    pub fn m1(&self) -> usize {
        self.b.len()
    }

    pub fn m2(&self) -> usize {
        self.xi.len()
    }

    pub fn is_quadratic(&self) -> bool {
        self.p.is_some()
    }

    /// Lower bounds with `-inf` filled in when x is free.
    pub fn lower_or_free(&self) -> Vec<f64> {
        self.lower_bounds.clone().unwrap_or_else(|| vec![f64::NEG_INFINITY; self.n1()])
    }

    pub fn has_bounds(&self) -> bool {
        self.lower_bounds.as_ref().is_some_and(|l| l.iter().any(|v| v.is_finite()))
    }

    /// `½xᵀQx + cᵀx + constant`.
    pub fn first_stage_value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q.mul_vec(x)) + dot(&self.c, x) + self.constant
    }

    /// `Qx + c`.
    pub fn first_stage_grad(&self, x: &[f64]) -> Vec<f64> {
        self.q.mul_vec(x).iter().zip(&self.c).map(|(a, b)| a + b).collect()
    }

    /// Checks dimensions, symmetry and definiteness.
    pub fn validate(&self) -> Result<(), ModelError> {
        let (n1, n2, m1, m2) = (self.n1(), self.n2(), self.m1(), self.m2());
        let dims = |what: &str, r: usize, c: usize, er: usize, ec: usize| {
            if r != er || c != ec {
                Err(ModelError::DimensionMismatch { what: what.to_string(), expected: format!("{er}x{ec}"), found: format!("{r}x{c}") })
            } else {
                Ok(())
            }
        };
        if n1 == 0 || n2 == 0 {
            return Err(ModelError::DimensionMismatch {
                what: "problem".into(),
                expected: "at least one variable per stage".into(),
                found: format!("n1={n1}, n2={n2}"),
            });
        }
        dims("Q", self.q.rows(), self.q.cols(), n1, n1)?;
        if m1 > 0 {
            dims("A", self.a.rows(), self.a.cols(), m1, n1)?;
        } else if self.a.rows() != 0 {
            dims("A", self.a.rows(), self.a.cols(), 0, n1)?;
        }
        dims("D", self.d_mat.rows(), self.d_mat.cols(), m2, n2)?;
        dims("T", self.tech.rows(), self.tech.cols(), m2, n1)?;
        if let Some(lb) = &self.lower_bounds {
            dims("lower bounds", lb.len(), 1, n1, 1)?;
            if lb.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
                return Err(ModelError::InvalidData("lower bounds must be finite or -inf".into()));
            }
        }
        if self.c.iter().chain(&self.b).chain(&self.d).chain(&self.xi).any(|v| !v.is_finite()) || !self.constant.is_finite() {
            return Err(ModelError::InvalidData("non-finite vector entry".into()));
        }
        if !self.q.is_symmetric(1e-12) {
            return Err(ModelError::NotSymmetric("Q".into()));
        }
        if let Some(p) = &self.p {
            dims("P", p.rows(), p.cols(), n2, n2)?;
            if !p.is_symmetric(1e-12) {
                return Err(ModelError::NotSymmetric("P".into()));
            }
            Cholesky::new(p).map_err(|_| ModelError::NotPositiveDefinite("P".into()))?;
        }
        if let Some((lo, hi)) = self.recourse_bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ModelError::InvalidData("recourse bounds must satisfy lo <= hi".into()));
            }
        }
        let check_pos = |pos: &RandomPosition| match *pos {
            RandomPosition::Rhs(i) if i < m2 => Ok(()),
            RandomPosition::Tech(i, j) if i < m2 && j < n1 => Ok(()),
            _ => Err(ModelError::InvalidDistribution(format!("position {pos:?} out of range"))),
        };
        match &self.stochastics {
            Stochastics::Independent(entries) => {
                for (k, e) in entries.iter().enumerate() {
                    check_pos(&e.position)?;
                    e.marginal.validate()?;
                    if entries[..k].iter().any(|o| o.position == e.position) {
                        return Err(ModelError::InvalidDistribution(format!("position {:?} listed twice", e.position)));
                    }
                }
            }
            Stochastics::Scenarios(list) => {
                if list.is_empty() {
                    return Err(ModelError::InvalidDistribution("empty scenario list".into()));
                }
                let mut total = 0.0;
                for s in list {
                    if !(s.prob > 0.0 && s.prob.is_finite()) {
                        return Err(ModelError::InvalidDistribution("scenario probability must be positive".into()));
                    }
                    total += s.prob;
                    for &(i, v) in &s.rhs {
                        check_pos(&RandomPosition::Rhs(i))?;
                        if !v.is_finite() {
                            return Err(ModelError::InvalidData("non-finite scenario value".into()));
                        }
                    }
                    for &(i, j, v) in &s.tech {
                        check_pos(&RandomPosition::Tech(i, j))?;
                        if !v.is_finite() {
                            return Err(ModelError::InvalidData("non-finite scenario value".into()));
                        }
                    }
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(ModelError::InvalidDistribution(format!("scenario probabilities sum to {total}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_mean_and_pick() {
        let m = Marginal::Discrete { values: vec![5.0, 7.0], probs: vec![0.3, 0.7] };
        assert!((m.mean() - 6.4).abs() < 1e-12);
        assert_eq!(pick(&[0.3, 0.7], 0.0), 0);
        assert_eq!(pick(&[0.3, 0.7], 0.3), 1);
        assert_eq!(pick(&[0.3, 0.7], 0.999_999), 1);
    }

    #[test]
    fn support_size_multiplies() {
        let e = |i| RandomEntry {
            position: RandomPosition::Rhs(i),
            marginal: Marginal::Discrete { values: vec![1.0, 2.0, 3.0], probs: vec![1.0 / 3.0; 3] },
        };
        assert_eq!(Stochastics::Independent(vec![e(0), e(1), e(2)]).support_size(), Some(27));
        assert_eq!(Stochastics::deterministic().support_size(), Some(1));
        let cont = RandomEntry { position: RandomPosition::Rhs(0), marginal: Marginal::Uniform { lo: 0.0, hi: 1.0 } };
        assert_eq!(Stochastics::Independent(vec![cont]).support_size(), None);
    }
}
