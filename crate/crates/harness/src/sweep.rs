//! Monte Carlo sweeps.
//!
//! Trial `t` of a run with master seed `s` uses the sub-seed
//! `derive_seed(s, t)`; the topology and the channel are drawn from two further
//! derived seeds. The same trial therefore sees the same network at every sweep
//! point (for user sweeps, the same RRH positions) and every algorithm sees a
//! bit-identical channel.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use gsbf_core::channel::derive_seed;
use gsbf_core::model::units::{db_to_linear, dbm_to_watts};
use gsbf_core::{
    generate_channel, generate_scenario, run, Algorithm, ChannelState, NetworkInstance, PowerModel, ProblemData,
    QosSpec, SolveStatus,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;

const TOPOLOGY_LABEL: u64 = 1;
const CHANNEL_LABEL: u64 = 2;

/// The swept variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepKind {
    Sinr,
    Transport,
    Users,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Sinr => "sinr_db",
            SweepKind::Transport => "transport_w",
            SweepKind::Users => "users",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinr_db" => Ok(SweepKind::Sinr),
            "transport_w" => Ok(SweepKind::Transport),
            "users" => Ok(SweepKind::Users),
            other => bail!("unknown sweep variable {other:?}"),
        }
    }
}

/// One sweep point with all units already converted.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub index: usize,
    /// Value of the swept variable in config units.
    pub value: f64,
    pub num_users: usize,
    /// Linear SINR target.
    pub gamma: f64,
    /// Noise power, watts.
    pub sigma2: f64,
    pub p_delta: Vec<f64>,
}

/// A validated config resolved into concrete sweep points.
#[derive(Debug, Clone)]
pub struct Plan {
    pub kind: SweepKind,
    pub points: Vec<Point>,
    pub antennas: Vec<usize>,
    pub eta: Vec<f64>,
    pub p_max: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub config: ExperimentConfig,
    pub config_hash: String,
}

impl Plan {
    pub fn new(config: &ExperimentConfig, kind: SweepKind) -> Result<Self> {
        config.validate()?;
        let l = config.scenario.num_rrh;
        let base_delta = config.power.p_delta_w.expand(l)?;
        let sigma2 = dbm_to_watts(config.qos.noise_dbm);
        let base = |index, value| Point {
            index,
            value,
            num_users: config.scenario.num_users,
            gamma: db_to_linear(config.qos.target_sinr_db),
            sigma2,
            p_delta: base_delta.clone(),
        };
        let points = match kind {
            SweepKind::Sinr => config
                .sweep
                .sinr_db
                .iter()
                .enumerate()
                .map(|(i, &db)| Point { gamma: db_to_linear(db), ..base(i, db) })
                .collect(),
            SweepKind::Transport => config
                .sweep
                .transport_w
                .iter()
                .enumerate()
                .map(|(i, &pc)| Point { p_delta: vec![pc; l], ..base(i, pc) })
                .collect(),
            SweepKind::Users => config
                .sweep
                .users
                .iter()
                .enumerate()
                .map(|(i, &k)| Point { num_users: k, ..base(i, k as f64) })
                .collect(),
        };
        Ok(Self {
            kind,
            points,
            antennas: config.scenario.antennas.expand(l)?,
            eta: config.power.eta.expand(l)?,
            p_max: config.power.p_max_w.expand(l)?,
            algorithms: config.algorithm_list()?,
            config_hash: config.hash(),
            config: config.clone(),
        })
    }

    /// The base point of a config: every variable at its unswept value.
    pub fn single(config: &ExperimentConfig) -> Result<Self> {
        let mut plan = Self::new(config, SweepKind::Sinr)?;
        let value = config.qos.target_sinr_db;
        plan.points = vec![Point { index: 0, value, gamma: db_to_linear(value), ..plan.points[0].clone() }];
        Ok(plan)
    }

    pub fn sub_seed(&self, trial: usize) -> u64 {
        derive_seed(self.config.master_seed, trial as u64)
    }

    /// Topology, channel and QoS of `trial` at `point`.
    pub fn instance(&self, point: &Point, trial: usize) -> Result<TrialInstance> {
        let sub = self.sub_seed(trial);
        let model = PowerModel::new(self.eta.clone(), self.p_max.clone(), point.p_delta.clone())?;
        let network = generate_scenario(
            self.config.scenario.half_side_m,
            self.antennas.clone(),
            point.num_users,
            model,
            derive_seed(sub, TOPOLOGY_LABEL),
        )?;
        let channel = generate_channel(&network, &self.config.channel.params(), derive_seed(sub, CHANNEL_LABEL))?;
        let qos = QosSpec::new(vec![point.gamma; point.num_users], vec![point.sigma2; point.num_users])?;
        Ok(TrialInstance { sub_seed: sub, network, channel, qos })
    }
}

/// Everything one trial's algorithms run on.
#[derive(Debug, Clone)]
pub struct TrialInstance {
    pub sub_seed: u64,
    pub network: NetworkInstance<f64>,
    pub channel: ChannelState<f64>,
    pub qos: QosSpec<f64>,
}

/// One algorithm run at one sweep point and trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub config_hash: String,
    pub point: usize,
    pub trial: usize,
    pub sub_seed: u64,
    pub algorithm: Algorithm,
    pub sweep_var: SweepKind,
    pub sweep_value: f64,
    pub status: SolveStatus,
    /// Present iff optimal, like the power fields.
    pub num_active: Option<usize>,
    pub transmit_power: Option<f64>,
    pub network_power: Option<f64>,
    pub socp_count: usize,
    pub wall_time: Duration,
    pub diagnostic: Option<String>,
}

impl ResultRecord {
    fn sort_key(&self) -> (usize, usize, Algorithm) {
        (self.point, self.trial, self.algorithm)
    }
}

/// Runs every listed algorithm on one trial instance.
pub fn run_trial(plan: &Plan, point: &Point, trial: usize) -> Result<Vec<ResultRecord>> {
    let inst = plan.instance(point, trial)?;
    let data = ProblemData::new(&inst.channel, &inst.qos, inst.network.power())?;
    let config = plan.config.algorithm_config();
    plan.algorithms
        .iter()
        .map(|&algorithm| {
            let out = run(algorithm, &data, &config)
                .with_context(|| format!("{algorithm} at point {} trial {trial}", point.index))?
                .outcome;
            let optimal = out.is_optimal();
            Ok(ResultRecord {
                config_hash: plan.config_hash.clone(),
                point: point.index,
                trial,
                sub_seed: inst.sub_seed,
                algorithm,
                sweep_var: plan.kind,
                sweep_value: point.value,
                status: out.status,
                num_active: optimal.then_some(out.active_set.len()),
                transmit_power: out.transmit_power,
                network_power: out.network_power,
                socp_count: out.socp_count,
                wall_time: out.wall_time,
                diagnostic: out.diagnostic,
            })
        })
        .collect()
}

/// Runs the whole sweep; trials and points run in parallel. Records come back
/// sorted by point, trial and algorithm.
pub fn run_sweep(plan: &Plan) -> Result<Vec<ResultRecord>> {
    let jobs: Vec<(&Point, usize)> = plan
        .points
        .iter()
        .flat_map(|p| (0..plan.config.trials).map(move |t| (p, t)))
        .collect();
    let batches: Vec<Vec<ResultRecord>> =
        jobs.par_iter().map(|&(p, t)| run_trial(plan, p, t)).collect::<Result<_>>()?;
    let mut records: Vec<ResultRecord> = batches.into_iter().flatten().collect();
    records.sort_by_key(|r| r.sort_key());
    Ok(records)
}
