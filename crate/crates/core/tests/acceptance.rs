//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is printed
//! even when every criterion passes. Reference values come from the
//! extensive-form oracle, brute-force grids and direct re-evaluation, never
//! from the solver under test.

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scs_core::cli::{run_experiment, run_experiment_on, RunConfig, SolverKind};
use scs_core::instances::{lands_toy, lands_toy_path, sqlp_fixtures, sqqp_fixtures};
use scs_core::linalg::{dot, norm_inf, DenseMatrix};
use scs_core::model::{
    enumerate_support, extensive_form, true_objective, ScenarioData, ScenarioSampler, Stochastics, Stream, TwoStageProblem, SUPPORT_LIMIT,
};
use scs_core::oracle::{
    closed_form_qq, solve_qp_bound, solve_recourse, solve_standard_lp, Evaluation, Objective, OracleError, RecourseSolution, SaaFunction,
    SolveStatus,
};
use scs_core::scs::{
    lambda_star, line_search, run, sample_requirement, sample_size, LineSearchConfig, LineSearchOutcome, SamplingMode, ScsParams,
    SolveReport, StepStatus, Termination,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Every SCS report produced along the way, for the invariants checked
/// across runs (criteria 3 and 4).
#[derive(Default)]
struct Runs {
    reports: Vec<(TwoStageProblem, SolveReport)>,
}

fn full_support_params() -> ScsParams {
    ScsParams { sampling: SamplingMode::FullSupport, record_trial_points: true, ..ScsParams::default() }
}

fn f_star(problem: &TwoStageProblem) -> (f64, Vec<f64>) {
    let set = enumerate_support(problem, SUPPORT_LIMIT).expect("finite support");
    let sol = extensive_form(problem, &set).expect("extensive form").solve().expect("extensive solve");
    (sol.value, sol.x)
}

fn true_value(problem: &TwoStageProblem, x: &[f64]) -> f64 {
    let set = enumerate_support(problem, SUPPORT_LIMIT).expect("finite support");
    true_objective(problem, &set, x).expect("true objective")
}

/// Full-support SCS against the extensive form: worst relative error and
/// slowest run.
fn ground_truth(problems: &[TwoStageProblem], runs: &mut Runs) -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut notes = Vec::new();
    for p in problems {
        let (fs, _) = f_star(p);
        let start = Instant::now();
        let report = run(p, &full_support_params()).expect("scs run");
        let secs = start.elapsed().as_secs_f64();
        let f = true_value(p, &report.x);
        let err = (f - fs).abs();
        let tol = 1e-3 * (1.0 + fs.abs());
        worst = worst.max(err / (1.0 + fs.abs()));
        slowest = slowest.max(secs);
        if err > tol || secs >= 10.0 {
            ok = false;
            notes.push(format!("{}: |f-f*|={err:.3e} in {secs:.2}s", p.name));
        }
        runs.reports.push((p.clone(), report));
    }
    let mut detail = format!("{} fixtures, worst |f-f*|/(1+|f*|) = {worst:.2e}, slowest {slowest:.2}s", problems.len());
    if !notes.is_empty() {
        detail.push_str(&format!(" [{}]", notes.join("; ")));
    }
    (ok, detail)
}

fn criterion_1(runs: &mut Runs) -> Outcome {
    let (ok, detail) = ground_truth(&sqlp_fixtures(), runs);
    outcome(ok, detail)
}

/// Random point of `{x ≥ 0, Σx = n}`.
fn random_feasible(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v * n as f64 / s).collect()
}

fn criterion_2(runs: &mut Runs) -> Outcome {
    let problems = sqqp_fixtures();
    let (ok_parity, parity) = ground_truth(&problems, runs);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut compared, mut worst) = (0usize, 0.0f64);
    let mut checked = 0usize;
    for p in &problems {
        let set = enumerate_support(p, SUPPORT_LIMIT).unwrap();
        for _ in 0..10 {
            let x = random_feasible(&mut rng, p.n1());
            for s in set.iter() {
                checked += 1;
                let (primal, _) = solve_recourse(p, &x, &s.data, None).expect("recourse solve");
                if let Some(cf) = closed_form_qq(p, &x, &s.data).expect("closed form") {
                    compared += 1;
                    worst = worst.max((cf.h - primal.h).abs());
                }
            }
        }
    }
    // The fixtures' optimal duals rarely pass the closed form's
    // optimality check, so add random recourse problems built around a
    // known primal-dual pair, some with active bounds.
    for _ in 0..200 {
        let (p, data) = planted_qq(&mut rng);
        checked += 1;
        let (primal, _) = solve_recourse(&p, &[0.0], &data, None).expect("recourse solve");
        if let Some(cf) = closed_form_qq(&p, &[0.0], &data).expect("closed form") {
            compared += 1;
            worst = worst.max((cf.h - primal.h).abs());
        }
    }
    let ok_cf = compared > 0 && worst <= 1e-6;
    outcome(
        ok_parity && ok_cf,
        format!("{parity}; closed form well-posed at {compared}/{checked} (x, scenario) pairs, max |h_cf - h| = {worst:.2e}"),
    )
}

/// Quadratic recourse with `y₀ ≥ 0`, `π₀` and `μ₀ ≥ 0` (zero off the
/// active set) satisfying the KKT conditions by construction.
fn planted_qq(rng: &mut ChaCha8Rng) -> (TwoStageProblem, ScenarioData) {
    let m = rng.random_range(1..=3);
    let n = m + rng.random_range(1..=4);
    let d_mat = random_matrix(rng, m, n);
    let l = random_matrix(rng, n, n);
    let mut pm = l.matmul(&l.transpose());
    for i in 0..n {
        pm[(i, i)] += 0.5;
    }
    let active = rng.random_bool(0.5);
    let y0: Vec<f64> = (0..n).map(|i| if active && i == 0 { 0.0 } else { rng.random_range(0.5..2.0) }).collect();
    let mu: Vec<f64> = (0..n).map(|i| if active && i == 0 { rng.random_range(0.5..2.0) } else { 0.0 }).collect();
    let pi0: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let py = pm.mul_vec(&y0);
    let dtpi = d_mat.tr_mul_vec(&pi0);
    let d: Vec<f64> = (0..n).map(|i| dtpi[i] + mu[i] - py[i]).collect();
    let r = d_mat.mul_vec(&y0);
    let p = TwoStageProblem {
        name: "planted".into(),
        q: DenseMatrix::zeros(1, 1),
        c: vec![0.0],
        a: DenseMatrix::zeros(0, 1),
        b: vec![],
        lower_bounds: None,
        d_mat,
        d,
        p: Some(pm),
        xi: r.clone(),
        tech: DenseMatrix::zeros(m, 1),
        stochastics: Stochastics::deterministic(),
        constant: 0.0,
        recourse_bounds: None,
    };
    let data = ScenarioData { xi: r, tech: Arc::new(DenseMatrix::zeros(m, 1)) };
    (p, data)
}

struct FeasibilityScan {
    points: usize,
    worst_eq: f64,
    worst_lb: f64,
}

fn scan_feasibility(problem: &TwoStageProblem, points: &[Vec<f64>], scan: &mut FeasibilityScan) -> bool {
    let scale = 1.0 + norm_inf(&problem.b);
    let lower = problem.lower_or_free();
    let mut ok = true;
    for x in points {
        let ax = problem.a.mul_vec(x);
        let eq = ax.iter().zip(&problem.b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let lb = x.iter().zip(&lower).filter(|(_, l)| l.is_finite()).map(|(v, l)| l - v).fold(f64::NEG_INFINITY, f64::max);
        scan.points += 1;
        scan.worst_eq = scan.worst_eq.max(eq / scale);
        scan.worst_lb = scan.worst_lb.max(lb);
        ok &= eq <= 1e-8 * scale && lb <= 1e-9;
    }
    ok
}

fn criterion_3(runs: &mut Runs) -> Outcome {
    // Adaptive runs on top of the full-support ones already collected.
    for p in sqlp_fixtures().into_iter().chain(sqqp_fixtures()) {
        for seed in 0..3 {
            let params = ScsParams { seed, record_trial_points: true, ..ScsParams::default() };
            let report = run(&p, &params).expect("scs run");
            runs.reports.push((p.clone(), report));
        }
    }
    let mut scan = FeasibilityScan { points: 0, worst_eq: 0.0, worst_lb: f64::NEG_INFINITY };
    let mut ok = true;
    for (p, r) in &runs.reports {
        ok &= scan_feasibility(p, &r.iterates, &mut scan);
        ok &= scan_feasibility(p, &r.trial_points, &mut scan);
        ok &= scan_feasibility(p, std::slice::from_ref(&r.x), &mut scan);
    }
    outcome(
        ok,
        format!(
            "{} runs, {} points: max ||Ax-b||/(1+||b||) = {:.2e}, max bound violation = {:.2e}",
            runs.reports.len(),
            scan.points,
            scan.worst_eq,
            scan.worst_lb.max(0.0)
        ),
    )
}

fn combo_sq(g: &[f64], d: &[f64], lambda: f64) -> f64 {
    g.iter().zip(d).map(|(gi, di)| -lambda * di + (1.0 - lambda) * gi).map(|v| v * v).sum()
}

fn criterion_4(runs: &Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_val: f64 = 0.0;
    let mut worst_arg: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ls = lambda_star(&g, &d);
        let (mut best, mut arg) = (f64::INFINITY, 0.0);
        for i in 0..=10_000 {
            let l = i as f64 / 10_000.0;
            let v = combo_sq(&g, &d, l);
            if v < best {
                best = v;
                arg = l;
            }
        }
        let v = combo_sq(&g, &d, ls);
        worst_val = worst_val.max((v - best).abs() / (1.0 + best));
        worst_arg = worst_arg.max((ls - arg).abs());
    }
    let grid_ok = worst_val <= 1e-6 && worst_arg <= 1e-4;

    let (mut iters, mut worst_res) = (0usize, f64::NEG_INFINITY);
    let mut descent_ok = true;
    for (_, r) in &runs.reports {
        for diag in &r.diagnostics {
            if diag.step == StepStatus::Skipped && diag.direction.iter().all(|v| *v == 0.0) {
                continue;
            }
            iters += 1;
            let scale = 1.0 + dot(&diag.g_proj, &diag.g_proj);
            let res = dot(&diag.direction, &diag.g_proj) + dot(&diag.direction, &diag.direction);
            worst_res = worst_res.max(res / scale);
            descent_ok &= res <= 1e-9 * scale;
        }
    }
    outcome(
        grid_ok && descent_ok && iters > 0,
        format!(
            "100 pairs: max objective gap to grid {worst_val:.2e}, max |lambda - grid argmin| {worst_arg:.1e}; \
             {iters} iterations: max (<d,g>+||d||^2)/(1+||g||^2) = {worst_res:.2e}"
        ),
    )
}

struct Half;

impl Objective for Half {
    fn dim(&self) -> usize {
        1
    }
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, OracleError> {
        Ok(Evaluation { value: 0.5 * x[0] * x[0], subgradient: vec![x[0]] })
    }
}

/// `max_i aᵢᵀx + bᵢ`.
struct PiecewiseLinear {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Objective for PiecewiseLinear {
    fn dim(&self) -> usize {
        self.a[0].len()
    }
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, OracleError> {
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        for (i, (ai, bi)) in self.a.iter().zip(&self.b).enumerate() {
            let v = dot(ai, x) + bi;
            if v > best {
                best = v;
                arg = i;
            }
        }
        Ok(Evaluation { value: best, subgradient: self.a[arg].clone() })
    }
}

fn ls_config(t_max: f64) -> LineSearchConfig {
    LineSearchConfig { m1: 0.4, m2: 0.3, t_max, max_bisections: 60, resolution: 1e-12 }
}

fn criterion_5() -> Outcome {
    // f = ½x² from x = 1 along d = −1: L ∩ R = [0.6, 1).
    let mut analytic = Vec::new();
    for t_max in [1.0, 1.3, 2.0, 4.0] {
        let ls = line_search(&Half, &[1.0], 0.5, &[-1.0], ls_config(t_max)).unwrap();
        analytic.push(match ls.outcome {
            LineSearchOutcome::Success { t, .. } => Some(t),
            _ => None,
        });
    }
    let analytic_ok = analytic.iter().all(|t| t.is_some_and(|t| (0.6..1.0).contains(&t)));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut successes, mut verified) = (0, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let pieces = rng.random_range(3..=10);
        let f = PiecewiseLinear {
            a: (0..pieces).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
            b: (0..pieces).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ex = f.evaluate(&x).unwrap();
        let d: Vec<f64> = ex.subgradient.iter().map(|v| -v).collect();
        let t_max = rng.random_range(0.5..5.0);
        let ls = line_search(&f, &x, ex.value, &d, ls_config(t_max)).unwrap();
        if let LineSearchOutcome::Success { t, .. } = ls.outcome {
            successes += 1;
            // Re-evaluate independently of what the search returned.
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let et = f.evaluate(&xt).unwrap();
            let dd = dot(&d, &d);
            let slope = dot(&et.subgradient, &d);
            if et.value - ex.value <= -0.3 * t * dd && slope < 0.0 && slope >= -0.4 * dd {
                verified += 1;
            }
        }
    }
    let random_ok = successes > 0 && verified == successes;

    // Starve the search so it fails, then check the radius shrinks.
    let p = &sqlp_fixtures()[0];
    let params = ScsParams { max_bisections: 1, max_iter: 60, seed: 5, ..ScsParams::default() };
    let report = run(p, &params).unwrap();
    let (mut fails, mut shrunk) = (0, 0);
    // `delta` in the history is the radius after the iteration's update.
    for (i, diag) in report.diagnostics.iter().enumerate() {
        if let StepStatus::Fail(_) = diag.step {
            fails += 1;
            let before = if i == 0 { params.delta0 } else { report.history[i - 1].delta };
            let floor = params.resolution * (1.0 + norm_inf(&report.iterates[i]));
            if (report.history[i].delta - (before / params.gamma).max(floor)).abs() <= 1e-12 * before {
                shrunk += 1;
            }
        }
    }
    let fail_ok = fails > 0 && shrunk == fails;
    let shown: Vec<String> = analytic.iter().map(|t| t.map_or("none".into(), |t| format!("{t:.4}"))).collect();
    outcome(
        analytic_ok && random_ok && fail_ok,
        format!(
            "analytic steps [{}]; {verified}/{successes} Success outputs satisfy both conditions; \
             {shrunk}/{fails} failed searches shrink delta by gamma",
            shown.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let n = sample_size(0.05, 1.0, 1.0, 0.5, usize::MAX).unwrap();
    let base = sample_requirement(0.05, 1.0, 1.0, 0.5).unwrap();
    let mut law_ok = true;
    for delta in [0.1, 0.25, 0.5, 1.0, 2.0, 3.7] {
        let r = sample_requirement(0.05, 1.0, 1.0, delta).unwrap();
        let expect = base * (0.5f64 / delta).powi(4);
        law_ok &= (r - expect).abs() <= 1e-12 * expect;
    }
    // Independent evaluation of the closed-form requirement.
    let direct = (-8.0 * (0.05f64 / 2.0).ln() / 0.5f64.powi(4)).ceil() as usize;
    outcome(n == 473 && direct == 473 && law_ok, format!("sample_size(.05, 1, 1, .5) = {n}; delta^-4 scaling exact: {law_ok}"))
}

fn criterion_7() -> Outcome {
    let p = &sqlp_fixtures()[0];
    let (_, x_hat) = f_star(p);
    let set = enumerate_support(p, SUPPORT_LIMIT).unwrap();
    let full = SaaFunction::new(p, set.clone());
    let f = full.value(&x_hat).unwrap();
    let hs: Vec<f64> = set.iter().map(|s| solve_recourse(p, &x_hat, &s.data, None).unwrap().0.h).collect();
    let range = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let kappa = 1.0;
    // Radius at which the rule asks for about 400 scenarios.
    let delta = (-8.0 * (0.1f64 / 2.0).ln() * range * range / (kappa * kappa * 400.0)).powf(0.25);
    let n = sample_size(0.1, range, kappa, delta, usize::MAX).unwrap();
    let tol = 0.5 * kappa * delta * delta;
    let mut covered = 0;
    for seed in 0..100 {
        let mut sampler = ScenarioSampler::new(p, seed, Stream::Main);
        let f_s = SaaFunction::new(p, sampler.sample(n)).value(&x_hat).unwrap();
        if (f_s - f).abs() <= tol {
            covered += 1;
        }
    }
    outcome(covered >= 85, format!("|S| = {n}, tolerance {tol:.3e}: {covered}/100 trials within"))
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
    DenseMatrix::new(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn lp_gap(cost: &[f64], rhs: &[f64], y: &[f64], pi: &[f64]) -> f64 {
    let primal = dot(cost, y);
    (primal - dot(rhs, pi)).abs() / (1.0 + primal.abs())
}

fn kkt_residual(p: &DenseMatrix, q: &[f64], d: &DenseMatrix, rhs: &[f64], lower: &[f64], s: &RecourseSolution) -> f64 {
    let py = p.mul_vec(&s.y);
    let dtpi = d.tr_mul_vec(&s.pi);
    let stat = (0..q.len()).map(|i| (py[i] + q[i] - dtpi[i] - s.bound_duals[i]).abs()).fold(0.0, f64::max);
    let dy = d.mul_vec(&s.y);
    let prim = dy.iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let bound = s.y.iter().zip(lower).map(|(y, l)| (l - y).max(0.0)).fold(0.0, f64::max);
    let dual = s.bound_duals.iter().map(|m| (-m).max(0.0)).fold(0.0, f64::max);
    let comp = s.y.iter().zip(lower).zip(&s.bound_duals).map(|((y, l), m)| ((y - l) * m).abs()).fold(0.0, f64::max);
    let scale = 1.0 + norm_inf(q).max(norm_inf(rhs));
    stat.max(prim).max(bound).max(dual).max(comp) / scale
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let problems: Vec<TwoStageProblem> = sqlp_fixtures().into_iter().chain(sqqp_fixtures()).collect();

    // Subgradient inequality h(z) ≥ h(x) + vᵀ(z − x) per scenario.
    let (mut checks, mut sub_fail, mut worst_sub) = (0, 0, f64::NEG_INFINITY);
    let (mut lp_optimal, mut worst_gap) = (0, 0.0f64);
    let (mut qp_optimal, mut worst_kkt) = (0, 0.0f64);
    while checks < 1000 {
        let p = &problems[rng.random_range(0..problems.len())];
        let set = enumerate_support(p, SUPPORT_LIMIT).unwrap();
        let s = set.get(rng.random_range(0..set.len())).unwrap();
        let x = random_feasible(&mut rng, p.n1());
        let z = random_feasible(&mut rng, p.n1());
        let (sx, _) = solve_recourse(p, &x, &s.data, None).unwrap();
        let (sz, _) = solve_recourse(p, &z, &s.data, None).unwrap();
        let v: Vec<f64> = s.data.tech.tr_mul_vec(&sx.pi).iter().map(|a| -a).collect();
        let diff: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
        let viol = sx.h + dot(&v, &diff) - sz.h;
        let scaled = viol / (1.0 + sx.h.abs().max(sz.h.abs()));
        worst_sub = worst_sub.max(scaled);
        if scaled > 1e-8 {
            sub_fail += 1;
        }
        checks += 1;
        let rhs: Vec<f64> = s.data.xi.iter().zip(&s.data.tech.mul_vec(&x)).map(|(a, b)| a - b).collect();
        match &p.p {
            None => {
                lp_optimal += 1;
                worst_gap = worst_gap.max(lp_gap(&p.d, &rhs, &sx.y, &sx.pi));
            }
            Some(pm) => {
                qp_optimal += 1;
                worst_kkt = worst_kkt.max(kkt_residual(pm, &p.d, &p.d_mat, &rhs, &vec![0.0; p.n2()], &sx));
            }
        }
    }

    // Random standalone LPs and QPs, feasible by construction.
    for _ in 0..200 {
        let m = rng.random_range(1..=6);
        let n = m + rng.random_range(1..=8);
        let d = random_matrix(&mut rng, m, n);
        let y0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let rhs = d.mul_vec(&y0);
        let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cost: Vec<f64> = d.tr_mul_vec(&u).iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
        let lp = solve_standard_lp(&cost, &d, &rhs, None).unwrap();
        if lp.status == SolveStatus::Optimal {
            lp_optimal += 1;
            worst_gap = worst_gap.max(lp_gap(&cost, &rhs, &lp.x, &lp.duals));
        }
        let l = random_matrix(&mut rng, n, n);
        let mut pm = l.matmul(&l.transpose());
        for i in 0..n {
            pm[(i, i)] += 0.1;
        }
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lower = vec![0.0; n];
        let qp = solve_qp_bound(&pm, &q, &d, &rhs, &lower).unwrap();
        if qp.status == SolveStatus::Optimal {
            qp_optimal += 1;
            worst_kkt = worst_kkt.max(kkt_residual(&pm, &q, &d, &rhs, &lower, &qp));
        }
    }
    let ok = sub_fail == 0 && worst_gap <= 1e-7 && worst_kkt <= 1e-8;
    outcome(
        ok,
        format!(
            "{checks} subgradient checks, {sub_fail} violations (worst {worst_sub:.2e}); \
             {lp_optimal} LP optima, max gap {worst_gap:.2e}; {qp_optimal} QP optima, max KKT residual {worst_kkt:.2e}"
        ),
    )
}

fn final_eval(problem: &TwoStageProblem, solver: SolverKind, seed: u64) -> (f64, Option<Termination>) {
    let mut cfg = RunConfig::new(&problem.name, solver);
    cfg.seed = seed;
    let r = run_experiment_on(problem, &cfg).expect("experiment");
    let rep = &r.replications[0];
    (rep.history.last().map_or(f64::NAN, |h| h.f_eval), rep.termination)
}

fn criterion_9() -> Outcome {
    let (mut wins, mut pairs, mut converged) = (0, 0, 0);
    for p in &sqlp_fixtures() {
        for seed in 0..20 {
            let (scs, term) = final_eval(p, SolverKind::Scs, seed);
            let (sgd, _) = final_eval(p, SolverKind::Sgd, seed);
            let (smd, _) = final_eval(p, SolverKind::Smd, seed);
            pairs += 1;
            if scs <= sgd && scs <= smd {
                wins += 1;
            }
            if term == Some(Termination::Converged) {
                converged += 1;
            }
        }
    }
    outcome(
        wins * 5 >= pairs * 4 && converged == pairs,
        format!("SCS <= SGD and SMD in {wins}/{pairs} pairs; {converged}/{pairs} SCS runs stopped on ||d|| <= eps"),
    )
}

fn criterion_10(runs: &mut Runs) -> Outcome {
    let p = match lands_toy() {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("parse failed: {e}")),
    };
    let support = enumerate_support(&p, SUPPORT_LIMIT).map(|s| s.len());
    let (ok, detail) = ground_truth(std::slice::from_ref(&p), runs);
    outcome(ok && support.is_ok(), format!("{} support points; {detail}", support.map_or(0, |n| n)))
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut files = 0;
    for solver in [SolverKind::Scs, SolverKind::Sgd, SolverKind::Smd] {
        let outs: Vec<_> = (0..2).map(|i| dir.path().join(format!("{}_{i}", solver.name()))).collect();
        for out in &outs {
            let mut cfg = RunConfig::new(lands_toy_path(), solver);
            cfg.replications = 4;
            cfg.seed = 11;
            cfg.out = Some(out.clone());
            run_experiment(&cfg).expect("experiment");
        }
        let mut names: Vec<_> = fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
            files += 1;
            identical &= fs::read(outs[0].join(name)).unwrap() == fs::read(outs[1].join(name)).unwrap();
        }
    }
    outcome(identical && files > 0, format!("{files} CSV files compared across two runs, identical: {identical}"))
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    // Criteria 3 and 4 check invariants over the runs of 1, 2 and 10.
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "SQLP ground-truth convergence", criterion_1(&mut runs)),
        (2, "SQQP parity and closed form", criterion_2(&mut runs)),
        (10, "SMPS LandS end to end", criterion_10(&mut runs)),
    ];
    results.push((3, "feasibility of iterates and trial points", criterion_3(&mut runs)));
    results.push((4, "direction finding", criterion_4(&runs)));
    results.push((5, "line search", criterion_5()));
    results.push((6, "sample-size rule", criterion_6()));
    results.push((7, "Hoeffding coverage", criterion_7()));
    results.push((8, "oracle soundness", criterion_8()));
    results.push((9, "SCS beats SGD and SMD", criterion_9()));
    results.push((11, "determinism", criterion_11()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {:<4} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
