//! Synthetic test instances with complete recourse, and the LandS-style
//! SMPS toy.
//!
//! Synthetic second stages have the form `D = [W | I | −I]` with positive
//! costs on `W` and a penalty `ρ` on the identity blocks, so every
//! right-hand side is feasible and the recourse value is bounded below by
//! zero. The first stage is a scaled simplex `{x ≥ 0, Σx = budget}`.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{norm_inf, symmetric_eigenvalues, DenseMatrix};
use crate::model::{ScenarioSpec, Stochastics, TwoStageProblem};
use crate::smps::{self, SmpsError};

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub name: String,
    pub n1: usize,
    /// Number of columns of `W`.
    pub recourse_cols: usize,
    pub m2: usize,
    pub scenarios: usize,
    /// Scale of the first-stage Hessian; zero gives a linear first stage.
    pub first_stage_curvature: f64,
    /// Adds a positive definite `P` to the second stage.
    pub quadratic_recourse: bool,
    /// Randomizes the technology matrix per scenario as well as ξ.
    pub random_tech: bool,
    pub budget: f64,
    pub penalty: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(name: &str, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            n1: 4,
            recourse_cols: 4,
            m2: 3,
            scenarios: 20,
            first_stage_curvature: 0.5,
            quadratic_recourse: false,
            random_tech: true,
            budget: 4.0,
            penalty: 8.0,
            seed,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, lo: f64, hi: f64) -> DenseMatrix {
    let data = (0..r * c).map(|_| uniform(rng, lo, hi)).collect();
    DenseMatrix::new(r, c, data).expect("finite")
}

/// `scale · (LLᵀ/n + 0.1 I)`, symmetric positive definite.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DenseMatrix {
    let l = random_matrix(rng, n, n, -1.0, 1.0);
    let mut m = l.matmul(&l.transpose());
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = scale * (m[(i, j)] / n as f64 + if i == j { 0.1 } else { 0.0 });
        }
    }
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn synthetic(spec: &SyntheticSpec) -> TwoStageProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n1, k, m2) = (spec.n1, spec.recourse_cols, spec.m2);
    let n2 = k + 2 * m2;

    let q =
        if spec.first_stage_curvature > 0.0 { random_spd(&mut rng, n1, spec.first_stage_curvature) } else { DenseMatrix::zeros(n1, n1) };
    let c: Vec<f64> = (0..n1).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    let a = DenseMatrix::new(1, n1, vec![1.0; n1]).expect("finite");
    let b = vec![spec.budget];

    let w = random_matrix(&mut rng, m2, k, -1.0, 1.0);
    let mut d_mat = DenseMatrix::zeros(m2, n2);
    for i in 0..m2 {
        for j in 0..k {
            d_mat[(i, j)] = w[(i, j)];
        }
        d_mat[(i, k + i)] = 1.0;
        d_mat[(i, k + m2 + i)] = -1.0;
    }
    let mut d: Vec<f64> = (0..k).map(|_| uniform(&mut rng, 1.0, 3.0)).collect();
    d.extend(std::iter::repeat_n(spec.penalty, 2 * m2));
    let p = spec.quadratic_recourse.then(|| random_spd(&mut rng, n2, 1.0));

    let tech = random_matrix(&mut rng, m2, n1, -1.0, 1.0);
    let xi: Vec<f64> = (0..m2).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();

    let raw: Vec<f64> = (0..spec.scenarios).map(|_| uniform(&mut rng, 0.5, 1.5)).collect();
    let total: f64 = raw.iter().sum();
    let mut list = Vec::with_capacity(spec.scenarios);
    for (s, r) in raw.iter().enumerate() {
        let prob = if s + 1 == spec.scenarios { 1.0 - list.iter().map(|x: &ScenarioSpec| x.prob).sum::<f64>() } else { r / total };
        let rhs = (0..m2).map(|i| (i, xi[i] + uniform(&mut rng, -2.0, 2.0))).collect();
        let tech_over = if spec.random_tech {
            (0..m2).flat_map(|i| (0..n1).map(move |j| (i, j))).map(|(i, j)| (i, j, tech[(i, j)] + uniform(&mut rng, -0.5, 0.5))).collect()
        } else {
            Vec::new()
        };
        list.push(ScenarioSpec { prob, rhs, tech: tech_over });
    }

    let mut problem = TwoStageProblem {
        name: spec.name.clone(),
        q,
        c,
        a,
        b,
        lower_bounds: Some(vec![0.0; n1]),
        d_mat,
        d,
        p,
        xi,
        tech,
        stochastics: Stochastics::Scenarios(list),
        constant: 0.0,
        recourse_bounds: None,
    };
    problem.recourse_bounds = Some(recourse_bounds(&problem, spec.budget));
    problem
}

/// Valid bounds `0 ≤ h ≤ M` over the first-stage set: any right-hand side
/// `r` is met by the identity blocks at cost `ρ‖r‖₁` (plus `½λ_max(P)‖r‖²`
/// with quadratic recourse), and `‖r‖∞ ≤ ‖ξ‖∞ + ‖C‖∞·budget`.
fn recourse_bounds(problem: &TwoStageProblem, budget: f64) -> (f64, f64) {
    let Stochastics::Scenarios(list) = &problem.stochastics else { unreachable!() };
    let m2 = problem.m2();
    let penalty = problem.d[problem.d.len() - 1];
    let mut worst: f64 = 0.0;
    for s in list {
        let mut xi = problem.xi.clone();
        let mut tech = problem.tech.clone();
        for &(i, v) in &s.rhs {
            xi[i] = v;
        }
        for &(i, j, v) in &s.tech {
            tech[(i, j)] = v;
        }
        let row_sum = (0..m2).map(|i| tech.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let r = norm_inf(&xi) + row_sum * budget;
        let mut h = penalty * r * m2 as f64;
        if let Some(p) = &problem.p {
            let lmax = symmetric_eigenvalues(p).last().copied().unwrap_or(0.0);
            h += 0.5 * lmax * r * r * m2 as f64;
        }
        worst = worst.max(h);
    }
    (0.0, worst)
}

/// Five linear-recourse fixtures with at most 10 variables per stage and
/// at most 50 scenarios.
pub fn sqlp_fixtures() -> Vec<TwoStageProblem> {
    let mut out = Vec::new();
    let shapes = [(3, 4, 3, 10, 0.5), (4, 4, 3, 20, 0.5), (5, 3, 3, 30, 1.0), (6, 4, 3, 40, 0.3), (8, 4, 3, 50, 0.5)];
    for (i, &(n1, k, m2, ns, curv)) in shapes.iter().enumerate() {
        let mut s = SyntheticSpec::new(&format!("sqlp{}", i + 1), 100 + i as u64);
        s.n1 = n1;
        s.recourse_cols = k;
        s.m2 = m2;
        s.scenarios = ns;
        s.first_stage_curvature = curv;
        s.budget = n1 as f64;
        out.push(synthetic(&s));
    }
    out
}

/// Three quadratic-recourse fixtures.
pub fn sqqp_fixtures() -> Vec<TwoStageProblem> {
    let mut out = Vec::new();
    let shapes = [(3, 2, 2, 10, 0.5), (4, 4, 3, 20, 0.0), (5, 4, 3, 30, 0.5)];
    for (i, &(n1, k, m2, ns, curv)) in shapes.iter().enumerate() {
        let mut s = SyntheticSpec::new(&format!("sqqp{}", i + 1), 200 + i as u64);
        s.n1 = n1;
        s.recourse_cols = k;
        s.m2 = m2;
        s.scenarios = ns;
        s.first_stage_curvature = curv;
        s.quadratic_recourse = true;
        s.budget = n1 as f64;
        out.push(synthetic(&s));
    }
    out
}

const LANDS_COR: &str = include_str!("../data/lands_toy.cor");
const LANDS_TIM: &str = include_str!("../data/lands_toy.tim");
const LANDS_STO: &str = include_str!("../data/lands_toy.sto");

/// The bundled LandS-style toy: four plants, three demand modes, 27
/// demand scenarios.
pub fn lands_toy() -> Result<TwoStageProblem, SmpsError> {
    let core = smps::parse_core(LANDS_COR)?;
    let split = smps::parse_time(LANDS_TIM, &core)?;
    let stoch = smps::parse_stoch(LANDS_STO, &core, &split)?;
    smps::assemble(&core, &split, &stoch)
}

/// Path of the bundled LandS toy core file.
pub fn lands_toy_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("lands_toy.cor")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_support, SUPPORT_LIMIT};

    #[test]
    fn fixtures_are_valid_and_small() {
        for p in sqlp_fixtures().iter().chain(sqqp_fixtures().iter()) {
            p.validate().unwrap();
            assert!(p.n1() <= 10 && p.n2() <= 10, "{}", p.name);
            let n = enumerate_support(p, SUPPORT_LIMIT).unwrap().len();
            assert!(n <= 50);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let s = SyntheticSpec::new("x", 9);
        assert_eq!(synthetic(&s), synthetic(&s));
    }

    #[test]
    fn lands_toy_dimensions() {
        let p = lands_toy().unwrap();
        assert_eq!((p.n1(), p.n2(), p.m2()), (6, 19, 7));
        assert_eq!(p.stochastics.support_size(), Some(27));
    }
}
