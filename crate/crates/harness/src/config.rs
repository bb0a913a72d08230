//! Experiment configuration files.
//!
//! Configs are TOML documents with a `schema_version` key; unknown keys are
//! rejected. A minimal example:
//!
//! ```toml
//! schema_version = 1
//! master_seed = 7
//! trials = 10
//! algorithms = ["cb", "gs", "bisection_gsbf"]
//!
//! [scenario]
//! num_rrh = 10
//! num_users = 15
//! antennas = 2
//! half_side_m = 1000.0
//!
//! [power]
//! eta = 4.0
//! p_max_w = 1.0
//! p_delta_w = 20.0            # or one value per RRH
//!
//! [qos]
//! target_sinr_db = 4.0
//! noise_dbm = -102.0
//!
//! [sweep]
//! sinr_db = [0.0, 2.0, 4.0, 6.0]
//! transport_w = [10.0, 20.0]
//! users = [5, 10]
//! ```
//!
//! `[channel]`, `[solver]` and `[algorithm]` are optional and default to the
//! library defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use gsbf_core::{Algorithm, AlgorithmConfig, ChannelParams, SolverSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    pub trials: usize,
    pub algorithms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub scenario: ScenarioSection,
    pub power: PowerSection,
    pub qos: QosSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub algorithm: AlgorithmSection,
}

/// A value shared by every RRH or given per RRH.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerRrh<T> {
    Common(T),
    List(Vec<T>),
}

impl<T: Clone> PerRrh<T> {
    pub fn expand(&self, num_rrh: usize) -> Result<Vec<T>> {
        match self {
            PerRrh::Common(v) => Ok(vec![v.clone(); num_rrh]),
            PerRrh::List(v) => {
                ensure!(v.len() == num_rrh, "expected {num_rrh} per-RRH values, got {}", v.len());
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub num_rrh: usize,
    /// Used unless the user count is swept.
    pub num_users: usize,
    pub antennas: PerRrh<usize>,
    /// Users and RRHs are dropped in `[-half_side_m, half_side_m]^2`.
    pub half_side_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub eta: PerRrh<f64>,
    pub p_max_w: PerRrh<f64>,
    /// Used unless the transport power is swept.
    pub p_delta_w: PerRrh<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosSection {
    /// Used unless the SINR target is swept.
    pub target_sinr_db: f64,
    pub noise_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub sinr_db: Vec<f64>,
    /// Common `P^c` values.
    pub transport_w: Vec<f64>,
    pub users: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub pathloss_intercept_db: f64,
    pub pathloss_slope_db: f64,
    pub shadowing_sigma_db: f64,
    pub antenna_gain_dbi: f64,
    pub shadowing: bool,
    pub fading: bool,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let p = ChannelParams::default();
        Self {
            pathloss_intercept_db: p.pathloss_intercept_db,
            pathloss_slope_db: p.pathloss_slope_db,
            shadowing_sigma_db: p.shadowing_sigma_db,
            antenna_gain_dbi: p.antenna_gain_dbi,
            shadowing: p.shadowing,
            fading: p.fading,
        }
    }
}

impl ChannelSection {
    pub fn params(&self) -> ChannelParams {
        ChannelParams {
            pathloss_intercept_db: self.pathloss_intercept_db,
            pathloss_slope_db: self.pathloss_slope_db,
            shadowing_sigma_db: self.shadowing_sigma_db,
            antenna_gain_dbi: self.antenna_gain_dbi,
            shadowing: self.shadowing,
            fading: self.fading,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub feasibility_tol: f64,
    pub gap_tol: f64,
    pub max_iter: u32,
    pub certificate_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::<f64>::default();
        Self {
            feasibility_tol: s.feasibility_tol,
            gap_tol: s.gap_tol,
            max_iter: s.max_iter,
            certificate_tol: s.certificate_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmSection {
    pub exhaustive_cap: usize,
    pub reweight_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_reweight: Option<usize>,
    pub epsilon_rel: f64,
    pub epsilon_floor: f64,
}

impl Default for AlgorithmSection {
    fn default() -> Self {
        let a = AlgorithmConfig::<f64>::default();
        Self {
            exhaustive_cap: a.exhaustive_cap,
            reweight_tol: a.reweight_tol,
            max_reweight: a.max_reweight,
            epsilon_rel: a.epsilon_rel,
            epsilon_floor: a.epsilon_floor,
        }
    }
}

/// Command-line overrides applied on top of a file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub algorithms: Option<Vec<String>>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(s) = o.seed {
            self.master_seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(a) = &o.algorithms {
            self.algorithms = a.clone();
        }
        if let Some(p) = &o.output {
            self.output = Some(p.clone());
        }
        self.validate()?;
        Ok(self)
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization,
    /// output path excluded.
    pub fn hash(&self) -> String {
        let canonical = Self { output: None, ..self.clone() }.to_toml();
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Algorithms in the order listed.
    pub fn algorithm_list(&self) -> Result<Vec<Algorithm>> {
        self.algorithms
            .iter()
            .map(|name| name.parse::<Algorithm>().map_err(anyhow::Error::from))
            .collect()
    }

    pub fn solver_settings(&self) -> SolverSettings<f64> {
        SolverSettings {
            feasibility_tol: self.solver.feasibility_tol,
            gap_tol: self.solver.gap_tol,
            max_iter: self.solver.max_iter,
            certificate_tol: self.solver.certificate_tol,
        }
    }

    pub fn algorithm_config(&self) -> AlgorithmConfig<f64> {
        AlgorithmConfig {
            solver: self.solver_settings(),
            exhaustive_cap: self.algorithm.exhaustive_cap,
            reweight_tol: self.algorithm.reweight_tol,
            max_reweight: self.algorithm.max_reweight,
            epsilon_rel: self.algorithm.epsilon_rel,
            epsilon_floor: self.algorithm.epsilon_floor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            self.schema_version
        );
        ensure!(self.trials >= 1, "trials must be at least 1");
        ensure!(!self.algorithms.is_empty(), "algorithm list is empty");
        let algorithms = self.algorithm_list()?;
        for (i, a) in algorithms.iter().enumerate() {
            ensure!(!algorithms[..i].contains(a), "algorithm {a} listed twice");
        }

        let s = &self.scenario;
        let l = s.num_rrh;
        ensure!(l >= 1, "num_rrh must be at least 1");
        ensure!(s.num_users >= 1, "num_users must be at least 1");
        ensure!(s.half_side_m.is_finite() && s.half_side_m > 0.0, "half_side_m must be positive");
        ensure!(s.antennas.expand(l)?.iter().all(|&n| n >= 1), "every RRH needs an antenna");

        let positive = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x > 0.0);
        let nonneg = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x >= 0.0);
        ensure!(positive(&self.power.eta.expand(l).context("power.eta")?), "eta must be positive");
        ensure!(positive(&self.power.p_max_w.expand(l).context("power.p_max_w")?), "p_max_w must be positive");
        ensure!(nonneg(&self.power.p_delta_w.expand(l).context("power.p_delta_w")?), "p_delta_w must be non-negative");
        ensure!(self.qos.target_sinr_db.is_finite() && self.qos.noise_dbm.is_finite(), "qos values must be finite");

        let w = &self.sweep;
        ensure!(!w.sinr_db.is_empty(), "sweep.sinr_db is empty");
        ensure!(!w.transport_w.is_empty(), "sweep.transport_w is empty");
        ensure!(!w.users.is_empty(), "sweep.users is empty");
        ensure!(w.sinr_db.iter().all(|x| x.is_finite()), "sweep.sinr_db must be finite");
        ensure!(nonneg(&w.transport_w), "sweep.transport_w must be non-negative");
        ensure!(w.users.iter().all(|&k| k >= 1), "sweep.users must be positive");

        self.channel.params().validate()?;
        self.solver_settings().validate().map_err(anyhow::Error::msg)?;
        ensure!(self.algorithm.reweight_tol > 0.0, "reweight_tol must be positive");
        ensure!(self.algorithm.epsilon_rel > 0.0 && self.algorithm.epsilon_floor > 0.0, "epsilon settings must be positive");

        if algorithms.contains(&Algorithm::Exhaustive) && l > self.algorithm.exhaustive_cap {
            bail!(
                "exhaustive search over {l} RRHs exceeds the cap of {}; drop it from the algorithm list \
                 or raise algorithm.exhaustive_cap",
                self.algorithm.exhaustive_cap
            );
        }
        Ok(())
    }
}
