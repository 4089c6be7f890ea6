use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scs_core::cli::{compare, run_experiment, InstanceFormat, RunConfig, SolverKind, DEFAULT_EVAL_SAMPLE};
use scs_core::history::format_f64;
use scs_core::Error;

#[derive(Parser)]
#[command(name = "scs", version, about = "Two-stage stochastic QP solver and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write per-replication CSVs, band.csv and summary.toml.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        solver: Solver,
        /// TOML file with solver parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run several solvers on the same instance and seed and write compare.csv.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["scs", "sgd", "smd"])]
        solvers: Vec<Solver>,
        /// TOML file with SCS parameters.
        #[arg(long)]
        scs_config: Option<PathBuf>,
        /// TOML file with SGD/SMD parameters.
        #[arg(long)]
        baseline_config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Native instance file, or the core file of an SMPS triple.
    #[arg(long)]
    instance: PathBuf,
    /// Defaults to smps for .cor/.core files and native otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    #[arg(long, default_value_t = DEFAULT_EVAL_SAMPLE)]
    eval_sample_size: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Smps,
    Native,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Scs,
    Sgd,
    Smd,
    Extensive,
}

impl From<Solver> for SolverKind {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Scs => SolverKind::Scs,
            Solver::Sgd => SolverKind::Sgd,
            Solver::Smd => SolverKind::Smd,
            Solver::Extensive => SolverKind::Extensive,
        }
    }
}

fn base_config(common: &Common, solver: Solver) -> RunConfig {
    let mut cfg = RunConfig::new(&common.instance, solver.into());
    if let Some(f) = common.format {
        cfg.format = match f {
            Format::Smps => InstanceFormat::Smps,
            Format::Native => InstanceFormat::Native,
        };
    }
    cfg.out = common.out.clone();
    cfg.seed = common.seed;
    cfg.replications = common.replications;
    cfg.eval_sample_size = common.eval_sample_size;
    cfg
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve { common, solver, config } => {
            let mut cfg = base_config(&common, solver);
            if let Some(path) = &config {
                cfg.apply_config_file(path)?;
            }
            let r = run_experiment(&cfg)?;
            let s = &r.summary;
            println!("solver      {}", s.solver);
            println!("final mean  {}", format_f64(s.final_mean));
            println!("95% band    [{}, {}]", format_f64(s.final_lo95), format_f64(s.final_hi95));
            if let Some(f) = s.f_star {
                println!("f*          {}", format_f64(f));
            }
            if let Some(c) = s.converged {
                println!("converged   {c}/{}", s.replications);
            }
        }
        Command::Compare { common, solvers, scs_config, baseline_config } => {
            let mut configs = Vec::new();
            for s in solvers {
                let mut cfg = base_config(&common, s);
                let file = match cfg.solver {
                    SolverKind::Scs => scs_config.as_ref(),
                    SolverKind::Sgd | SolverKind::Smd => baseline_config.as_ref(),
                    SolverKind::Extensive => None,
                };
                if let Some(path) = file {
                    cfg.apply_config_file(path)?;
                }
                configs.push(cfg);
            }
            let c = compare(&configs)?;
            for (i, (name, v)) in c.ranking.iter().enumerate() {
                println!("{}. {name:<10} {}", i + 1, format_f64(*v));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
