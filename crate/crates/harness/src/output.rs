//! CSV result files.
//!
//! `raw.csv` has one row per record:
//!
//! ```text
//! config_hash,trial,sub_seed,algorithm,sweep_var,sweep_value,status,num_active,transmit_power_w,network_power_w,socp_count,wall_time_s
//! ```
//!
//! `summary.csv` has one row per sweep point and algorithm:
//!
//! ```text
//! config_hash,sweep_var,sweep_value,algorithm,trials,common_feasible,infeasible,failed,mean_network_power_w,mean_transmit_power_w,mean_num_active,mean_socp_count
//! ```
//!
//! Reals are written with 9 significant digits, user counts as integers, and
//! missing values as empty fields. `wall_time_s` is empty unless timing was
//! requested, which keeps repeated runs byte-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gsbf_core::SolveStatus;

use crate::summary::SummaryRow;
use crate::sweep::{ResultRecord, SweepKind};

pub const RAW_HEADER: [&str; 12] = [
    "config_hash",
    "trial",
    "sub_seed",
    "algorithm",
    "sweep_var",
    "sweep_value",
    "status",
    "num_active",
    "transmit_power_w",
    "network_power_w",
    "socp_count",
    "wall_time_s",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "config_hash",
    "sweep_var",
    "sweep_value",
    "algorithm",
    "trials",
    "common_feasible",
    "infeasible",
    "failed",
    "mean_network_power_w",
    "mean_transmit_power_w",
    "mean_num_active",
    "mean_socp_count",
];

pub fn real(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn sweep_value(kind: SweepKind, v: f64) -> String {
    match kind {
        SweepKind::Users => format!("{}", v as usize),
        _ => real(v),
    }
}

pub fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::SolverFailure => "failure",
    }
}

pub fn write_raw<W: Write>(records: &[ResultRecord], timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER)?;
    for r in records {
        w.write_record([
            r.config_hash.clone(),
            r.trial.to_string(),
            r.sub_seed.to_string(),
            r.algorithm.name().to_string(),
            r.sweep_var.name().to_string(),
            sweep_value(r.sweep_var, r.sweep_value),
            status_name(r.status).to_string(),
            r.num_active.map(|n| n.to_string()).unwrap_or_default(),
            opt_real(r.transmit_power),
            opt_real(r.network_power),
            r.socp_count.to_string(),
            if timing { real(r.wall_time.as_secs_f64()) } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.config_hash.clone(),
            r.sweep_var.name().to_string(),
            sweep_value(r.sweep_var, r.sweep_value),
            r.algorithm.name().to_string(),
            r.trials.to_string(),
            r.common_feasible.to_string(),
            r.infeasible.to_string(),
            r.failed.to_string(),
            opt_real(r.mean_network_power),
            opt_real(r.mean_transmit_power),
            opt_real(r.mean_num_active),
            opt_real(r.mean_socp_count),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`emit_results`].
#[derive(Debug, Clone)]
pub struct Emitted {
    pub raw: PathBuf,
    pub summary: PathBuf,
}

/// Writes `raw.csv` and `summary.csv` into `dir`, creating it if needed.
pub fn emit_results(records: &[ResultRecord], rows: &[SummaryRow], dir: &Path, timing: bool) -> Result<Emitted> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let raw = dir.join("raw.csv");
    let summary = dir.join("summary.csv");
    let file = |p: &Path| fs::File::create(p).with_context(|| format!("creating {}", p.display()));
    write_raw(records, timing, file(&raw)?).with_context(|| format!("writing {}", raw.display()))?;
    write_summary(rows, file(&summary)?).with_context(|| format!("writing {}", summary.display()))?;
    Ok(Emitted { raw, summary })
}
