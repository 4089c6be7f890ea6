//! Experiment harness behind the `scs` binary: load an instance, run a
//! solver over several replications, fill in held-out objective values and
//! write per-replication CSVs plus a confidence band.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{sgd_run, smd_run, BaselineParams};
use crate::history::{format_f64, write_csv, IterateRecord};
use crate::model::{enumerate_support, extensive_form, native, ScenarioSampler, ScenarioSet, Stream, TwoStageProblem, SUPPORT_LIMIT};
use crate::oracle::SaaFunction;
use crate::scs::{run, ScsParams, Termination};
use crate::{smps, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceFormat {
    Smps,
    Native,
}

impl InstanceFormat {
    /// SMPS for `.cor`/`.core` files, native otherwise.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("cor" | "core") => InstanceFormat::Smps,
            _ => InstanceFormat::Native,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Scs,
    Sgd,
    Smd,
    Extensive,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Scs => "scs",
            SolverKind::Sgd => "sgd",
            SolverKind::Smd => "smd",
            SolverKind::Extensive => "extensive",
        }
    }
}

/// Default size of the held-out evaluation sample.
pub const DEFAULT_EVAL_SAMPLE: usize = 10_000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub instance: PathBuf,
    pub format: InstanceFormat,
    pub solver: SolverKind,
    pub scs: ScsParams,
    pub baseline: BaselineParams,
    pub eval_sample_size: usize,
    pub replications: usize,
    /// Directory for output files; `None` runs without writing.
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(instance: impl Into<PathBuf>, solver: SolverKind) -> Self {
        let instance = instance.into();
        Self {
            format: InstanceFormat::infer(&instance),
            instance,
            solver,
            scs: ScsParams::default(),
            baseline: BaselineParams::default(),
            eval_sample_size: DEFAULT_EVAL_SAMPLE,
            replications: 1,
            out: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.eval_sample_size == 0 {
            return Err(Error::InvalidConfig("eval_sample_size must be at least 1".into()));
        }
        Ok(())
    }

    /// Reads solver parameters from a TOML file whose keys are the fields
    /// of [`ScsParams`] or [`BaselineParams`], depending on the solver.
    pub fn apply_config_file(&mut self, path: &Path) -> Result<(), Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let bad = |e: toml::de::Error| Error::Config(format!("{}: {e}", path.display()));
        match self.solver {
            SolverKind::Scs => self.scs = toml::from_str(&text).map_err(bad)?,
            SolverKind::Sgd | SolverKind::Smd => self.baseline = toml::from_str(&text).map_err(bad)?,
            SolverKind::Extensive => {}
        }
        Ok(())
    }
}

pub fn load_instance(path: &Path, format: InstanceFormat) -> Result<TwoStageProblem, Error> {
    Ok(match format {
        InstanceFormat::Smps => smps::load(path)?,
        InstanceFormat::Native => native::load_native(path)?,
    })
}

/// Held-out sample for `f_eval`: the full support when it has at most
/// `size` points, otherwise `size` draws from the evaluation stream.
pub fn evaluation_set(problem: &TwoStageProblem, seed: u64, size: usize) -> Result<ScenarioSet, Error> {
    match problem.stochastics.support_size() {
        Some(n) if n <= size as u64 => Ok(enumerate_support(problem, SUPPORT_LIMIT)?),
        _ => Ok(ScenarioSampler::new(problem, seed, Stream::Evaluation).sample(size)),
    }
}

#[derive(Debug, Clone)]
pub struct Replication {
    pub seed: u64,
    pub history: Vec<IterateRecord>,
    pub x: Vec<f64>,
    /// SCS only.
    pub termination: Option<Termination>,
}

/// Sets `f_eval` of each record to the held-out objective at the matching
/// iterate; repeated iterates reuse the previous value.
fn fill_eval(history: &mut [IterateRecord], iterates: &[Vec<f64>], eval: &SaaFunction) -> Result<(), Error> {
    let mut last: Option<(&[f64], f64)> = None;
    for (rec, x) in history.iter_mut().zip(iterates) {
        let v = match last {
            Some((prev, v)) if prev == x.as_slice() => v,
            _ => eval.value(x)?,
        };
        rec.f_eval = v;
        last = Some((x, v));
    }
    Ok(())
}

fn run_one(problem: &TwoStageProblem, cfg: &RunConfig, seed: u64, eval: &SaaFunction) -> Result<Replication, Error> {
    match cfg.solver {
        SolverKind::Scs => {
            let params = ScsParams { seed, ..cfg.scs.clone() };
            let mut r = run(problem, &params)?;
            fill_eval(&mut r.history, &r.iterates, eval)?;
            Ok(Replication { seed, history: r.history, x: r.x, termination: Some(r.termination) })
        }
        SolverKind::Sgd | SolverKind::Smd => {
            let params = BaselineParams { seed, ..cfg.baseline.clone() };
            let mut r = if cfg.solver == SolverKind::Sgd { sgd_run(problem, &params)? } else { smd_run(problem, &params)? };
            fill_eval(&mut r.history, &r.iterates, eval)?;
            Ok(Replication { seed, history: r.history, x: r.x, termination: None })
        }
        SolverKind::Extensive => {
            let set = support_for_extensive(problem)?;
            let sol = extensive_form(problem, &set)?.solve()?;
            let rec = IterateRecord {
                k: 1,
                f_s: sol.value,
                f_eval: eval.value(&sol.x)?,
                d_norm: 0.0,
                delta: 0.0,
                sample_size: set.len(),
                step_t: 0.0,
                accepted: true,
                wall_ms: 0,
            };
            Ok(Replication { seed, history: vec![rec], x: sol.x, termination: None })
        }
    }
}

fn support_for_extensive(problem: &TwoStageProblem) -> Result<ScenarioSet, Error> {
    match problem.stochastics.support_size() {
        Some(n) if n <= SUPPORT_LIMIT => Ok(enumerate_support(problem, SUPPORT_LIMIT)?),
        Some(n) => Err(Error::UnsupportedSolverForInstance(format!("extensive form needs at most {SUPPORT_LIMIT} scenarios, found {n}"))),
        None => Err(Error::UnsupportedSolverForInstance("extensive form needs a finite support".into())),
    }
}

/// One row of the confidence band on `f_eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRow {
    pub k: usize,
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub lo95: f64,
    pub hi95: f64,
}

/// Mean and normal-approximation 95% band of `f_eval` per iteration.
/// Runs that stopped early contribute their final value to later rows.
pub fn band(histories: &[Vec<IterateRecord>]) -> Vec<BandRow> {
    let len = histories.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let vals: Vec<f64> = histories.iter().filter_map(|h| h.get(i).or(h.last())).map(|r| r.f_eval).collect();
            let n = vals.len();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let se = if n > 1 { (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 };
            BandRow { k: i + 1, n, mean, se, lo95: mean - 1.96 * se, hi95: mean + 1.96 * se }
        })
        .collect()
}

pub fn write_band<W: std::io::Write>(rows: &[BandRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "n", "mean", "se", "lo95", "hi95"])?;
    for r in rows {
        w.write_record([r.k.to_string(), r.n.to_string(), format_f64(r.mean), format_f64(r.se), format_f64(r.lo95), format_f64(r.hi95)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub replications: usize,
    pub eval_sample_size: usize,
    /// Extensive-form optimum, when the support is finite and small enough.
    pub f_star: Option<f64>,
    pub final_mean: f64,
    pub final_lo95: f64,
    pub final_hi95: f64,
    /// SCS runs that stopped on the direction-norm test.
    pub converged: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub replications: Vec<Replication>,
    pub band: Vec<BandRow>,
    pub summary: Summary,
}

/// Runs every replication (concurrently), then writes `rep_<r>.csv`,
/// `band.csv` and `summary.toml` into `cfg.out` when it is set.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult, Error> {
    cfg.validate()?;
    let problem = load_instance(&cfg.instance, cfg.format)?;
    run_experiment_on(&problem, cfg)
}

/// [`run_experiment`] on an already loaded problem.
pub fn run_experiment_on(problem: &TwoStageProblem, cfg: &RunConfig) -> Result<ExperimentResult, Error> {
    cfg.validate()?;
    let eval_set = evaluation_set(problem, cfg.seed, cfg.eval_sample_size)?;
    // Each replication gets its own evaluator: warm-start state shared
    // across threads would make the last bits of f_eval order dependent.
    let reps: Vec<Replication> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| run_one(problem, cfg, cfg.seed.wrapping_add(r), &SaaFunction::new(problem, eval_set.clone())))
        .collect::<Result<_, _>>()?;

    let histories: Vec<Vec<IterateRecord>> = reps.iter().map(|r| r.history.clone()).collect();
    let band = band(&histories);
    let f_star = match problem.stochastics.support_size() {
        Some(n) if n <= SUPPORT_LIMIT => {
            let set = enumerate_support(problem, SUPPORT_LIMIT)?;
            Some(extensive_form(problem, &set)?.solve()?.value)
        }
        _ => None,
    };
    let last = band.last().cloned().unwrap_or(BandRow { k: 0, n: 0, mean: f64::NAN, se: f64::NAN, lo95: f64::NAN, hi95: f64::NAN });
    let summary = Summary {
        instance: cfg.instance.display().to_string(),
        solver: cfg.solver.name().to_string(),
        seed: cfg.seed,
        replications: cfg.replications,
        eval_sample_size: cfg.eval_sample_size,
        f_star,
        final_mean: last.mean,
        final_lo95: last.lo95,
        final_hi95: last.hi95,
        converged: (cfg.solver == SolverKind::Scs).then(|| reps.iter().filter(|r| r.termination == Some(Termination::Converged)).count()),
    };

    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, r) in reps.iter().enumerate() {
            let path = dir.join(format!("rep_{i}.csv"));
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_csv(&r.history, file)?;
        }
        let path = dir.join("band.csv");
        write_band(&band, fs::File::create(&path).map_err(|e| Error::io(&path, e))?)?;
        let path = dir.join("summary.toml");
        let text = toml::to_string(&summary).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(ExperimentResult { replications: reps, band, summary })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub solvers: Vec<String>,
    /// Per-iteration mean `f_eval`, one column per solver; shorter runs
    /// carry their final value forward.
    pub rows: Vec<(usize, Vec<f64>)>,
    /// Solver names ordered by final mean `f_eval`, best first.
    pub ranking: Vec<(String, f64)>,
}

/// Runs several configurations on the same instance and seed and aligns
/// their `f_eval` curves. Writes `compare.csv` into the first config's
/// output directory when it is set.
pub fn compare(configs: &[RunConfig]) -> Result<Comparison, Error> {
    let Some(first) = configs.first() else {
        return Err(Error::InvalidConfig("nothing to compare".into()));
    };
    for c in &configs[1..] {
        if c.instance != first.instance || c.format != first.format {
            return Err(Error::MismatchedInstances(format!("{} vs {}", first.instance.display(), c.instance.display())));
        }
        if c.seed != first.seed || c.eval_sample_size != first.eval_sample_size {
            return Err(Error::MismatchedInstances("seeds and evaluation samples must agree".into()));
        }
    }
    let problem = load_instance(&first.instance, first.format)?;
    let mut bands = Vec::new();
    for c in configs {
        let cfg = RunConfig { out: None, ..c.clone() };
        bands.push(run_experiment_on(&problem, &cfg)?.band);
    }
    let solvers: Vec<String> = configs.iter().map(|c| c.solver.name().to_string()).collect();
    let len = bands.iter().map(Vec::len).max().unwrap_or(0);
    let rows: Vec<(usize, Vec<f64>)> =
        (0..len).map(|i| (i + 1, bands.iter().map(|b| b.get(i).or(b.last()).map_or(f64::NAN, |r| r.mean)).collect())).collect();
    let mut ranking: Vec<(String, f64)> =
        solvers.iter().cloned().zip(bands.iter().map(|b| b.last().map_or(f64::NAN, |r| r.mean))).collect();
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1));

    if let Some(dir) = &first.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("compare.csv");
        let mut w = csv::Writer::from_writer(fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
        let mut header = vec!["k".to_string()];
        header.extend(solvers.iter().cloned());
        w.write_record(&header)?;
        for (k, vals) in &rows {
            let mut rec = vec![k.to_string()];
            rec.extend(vals.iter().map(|v| format_f64(*v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(Comparison { solvers, rows, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize, f: f64) -> IterateRecord {
        IterateRecord { k, f_s: f, f_eval: f, d_norm: 0.0, delta: 1.0, sample_size: 1, step_t: 0.0, accepted: true, wall_ms: 0 }
    }

    #[test]
    fn band_carries_short_runs_forward() {
        let h = vec![vec![rec(1, 3.0), rec(2, 1.0)], vec![rec(1, 5.0)]];
        let b = band(&h);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].mean, 4.0);
        assert_eq!(b[1].mean, 3.0);
        // two values 1 and 5: sample sd 2√2, se 2
        assert!((b[1].se - 2.0).abs() < 1e-15);
        assert!((b[1].hi95 - 6.92).abs() < 1e-12);
    }

    #[test]
    fn single_replication_has_zero_width() {
        let b = band(&[vec![rec(1, 2.5)]]);
        assert_eq!((b[0].lo95, b[0].hi95), (2.5, 2.5));
    }

    #[test]
    fn format_inferred_from_extension() {
        assert_eq!(InstanceFormat::infer(Path::new("a/LandS.cor")), InstanceFormat::Smps);
        assert_eq!(InstanceFormat::infer(Path::new("a/x.toml")), InstanceFormat::Native);
    }

    #[test]
    fn mismatched_seeds_rejected() {
        let a = RunConfig::new("x.txt", SolverKind::Scs);
        let b = RunConfig { seed: 1, ..RunConfig::new("x.txt", SolverKind::Sgd) };
        assert!(matches!(compare(&[a, b]), Err(Error::MismatchedInstances(_))));
    }
}
