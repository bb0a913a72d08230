//! `gsbf`: Monte Carlo sweeps and invariant checks from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gsbf_core::SolveStatus;
use gsbf_harness::output::{emit_results, write_raw};
use gsbf_harness::snapshot::Snapshot;
use gsbf_harness::summary::summarize;
use gsbf_harness::sweep::{run_sweep, run_trial, Plan, SweepKind};
use gsbf_harness::validate::{all_passed, run_invariants};
use gsbf_harness::{ExperimentConfig, Overrides, ResultRecord};

/// Built-in config for `validate` when no file is given.
const VALIDATE_DEFAULT: &str = include_str!("../configs/validate.toml");

#[derive(Parser)]
#[command(name = "gsbf", version, about = "Network power minimization for Cloud-RAN downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the target SINR.
    SweepSinr(RunArgs),
    /// Sweep the common transport power.
    SweepTransport(RunArgs),
    /// Sweep the number of users.
    SweepUsers(RunArgs),
    /// Run one trial at the config's base point.
    Single {
        #[command(flatten)]
        run: RunArgs,
        /// Trial index.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Also write the trial's instance snapshot here.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory; defaults to the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero if any solve failed.
    #[arg(long)]
    strict: bool,
    /// Record wall times (output is then no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

impl CommonArgs {
    fn load(&self, out: Option<PathBuf>) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => bail!("--config is required"),
        };
        self.overlay(base, out)
    }

    fn overlay(&self, base: ExperimentConfig, output: Option<PathBuf>) -> Result<ExperimentConfig> {
        base.apply(&Overrides {
            seed: self.seed,
            trials: self.trials,
            algorithms: self.algorithms.clone(),
            output,
        })
    }
}

fn out_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    config.output.clone().context("no output directory: pass --out or set `output` in the config")
}

fn finish(config: &ExperimentConfig, records: &[ResultRecord], args: &RunArgs) -> Result<ExitCode> {
    let dir = out_dir(config)?;
    let rows = summarize(records);
    let files = emit_results(records, &rows, &dir, args.timing)?;
    let cfg_path = dir.join("config.toml");
    std::fs::write(&cfg_path, config.to_toml()).with_context(|| format!("writing {}", cfg_path.display()))?;
    let failures = records.iter().filter(|r| r.status == SolveStatus::SolverFailure).count();
    eprintln!(
        "{} records, {} solver failures; wrote {} and {}",
        records.len(),
        failures,
        files.raw.display(),
        files.summary.display()
    );
    Ok(if args.strict && failures > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn sweep(kind: SweepKind, args: &RunArgs) -> Result<ExitCode> {
    let config = args.common.load(args.out.clone())?;
    out_dir(&config)?;
    let plan = Plan::new(&config, kind)?;
    let records = run_sweep(&plan)?;
    finish(&config, &records, args)
}

fn single(args: &RunArgs, trial: usize, snapshot: Option<&PathBuf>) -> Result<ExitCode> {
    let config = args.common.load(args.out.clone())?;
    let plan = Plan::single(&config)?;
    let point = &plan.points[0];
    if let Some(path) = snapshot {
        let inst = plan.instance(point, trial)?;
        Snapshot::capture(&inst.network, &inst.channel, &inst.qos).save(path)?;
    }
    let records = run_trial(&plan, point, trial)?;
    if config.output.is_some() {
        return finish(&config, &records, args);
    }
    write_raw(&records, args.timing, std::io::stdout().lock())?;
    let failed = records.iter().any(|r| r.status == SolveStatus::SolverFailure);
    Ok(if args.strict && failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn validate(common: &CommonArgs) -> Result<ExitCode> {
    let config = match &common.config {
        Some(_) => common.load(None)?,
        None => common.overlay(ExperimentConfig::from_toml(VALIDATE_DEFAULT)?, None)?,
    };
    let checks = run_invariants(&config)?;
    for c in &checks {
        println!("{c}");
    }
    Ok(if all_passed(&checks) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SweepSinr(a) => sweep(SweepKind::Sinr, a),
        Command::SweepTransport(a) => sweep(SweepKind::Transport, a),
        Command::SweepUsers(a) => sweep(SweepKind::Users, a),
        Command::Single { run, trial, snapshot } => single(run, *trial, snapshot.as_ref()),
        Command::Validate { common } => validate(common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
