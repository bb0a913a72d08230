//! Instance snapshots for regression fixtures.
//!
//! A snapshot is a TOML document holding one trial's topology, power model,
//! QoS targets and channel. Reals are written in shortest round-trip form, so
//! loading a snapshot reproduces the instance bit for bit.
//!
//! ```toml
//! schema_version = 1
//! half_side_m = 1000.0
//! antennas = [2, 2]
//! rrh_positions = [[-120.5, 33.0], [410.2, -87.9]]
//! user_positions = [[12.0, 5.5]]
//! eta = [4.0, 4.0]
//! p_max_w = [1.0, 1.0]
//! p_delta_w = [6.0, 7.0]
//! gamma = [2.51188643150958]
//! sigma2_w = [6.30957344480193e-14]
//! # channel[k] is user k's row over all antennas, as [re, im] pairs
//! channel = [[[1.2e-7, -3.4e-8], [5.0e-8, 2.2e-7], [9.1e-9, 1.0e-9], [-4.0e-9, 7.7e-9]]]
//! ```

use std::path::Path;

use anyhow::{ensure, Context, Result};
use gsbf_core::{ChannelState, NetworkInstance, PowerModel, QosSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub schema_version: u32,
    pub half_side_m: f64,
    pub antennas: Vec<usize>,
    pub rrh_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    pub eta: Vec<f64>,
    pub p_max_w: Vec<f64>,
    pub p_delta_w: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sigma2_w: Vec<f64>,
    pub channel: Vec<Vec<[f64; 2]>>,
}

impl Snapshot {
    pub fn capture(network: &NetworkInstance<f64>, channel: &ChannelState<f64>, qos: &QosSpec<f64>) -> Self {
        let l = network.num_rrh();
        let power = network.power();
        let all: Vec<usize> = (0..l).collect();
        Self {
            schema_version: SNAPSHOT_VERSION,
            half_side_m: network.half_side(),
            antennas: network.antennas().to_vec(),
            rrh_positions: network.rrh_positions().to_vec(),
            user_positions: network.user_positions().to_vec(),
            eta: (0..l).map(|i| power.eta(i)).collect(),
            p_max_w: (0..l).map(|i| power.p_max(i)).collect(),
            p_delta_w: (0..l).map(|i| power.p_delta(i)).collect(),
            gamma: (0..qos.num_users()).map(|k| qos.gamma(k)).collect(),
            sigma2_w: (0..qos.num_users()).map(|k| qos.sigma2(k)).collect(),
            channel: (0..channel.num_users())
                .map(|k| channel.user_vector(k, &all).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    /// Rebuilds the instance, checking every core invariant.
    pub fn restore(&self) -> Result<(NetworkInstance<f64>, ChannelState<f64>, QosSpec<f64>)> {
        ensure!(
            self.schema_version == SNAPSHOT_VERSION,
            "unsupported snapshot schema_version {}",
            self.schema_version
        );
        let model = PowerModel::new(self.eta.clone(), self.p_max_w.clone(), self.p_delta_w.clone())?;
        let network = NetworkInstance::new(
            self.antennas.clone(),
            self.half_side_m,
            self.rrh_positions.clone(),
            self.user_positions.clone(),
            model,
        )?;
        let rows = self
            .channel
            .iter()
            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        let channel = ChannelState::from_rows(&self.antennas, rows)?;
        ensure!(
            channel.num_users() == network.num_users(),
            "channel has {} users, topology has {}",
            channel.num_users(),
            network.num_users()
        );
        let qos = QosSpec::new(self.gamma.clone(), self.sigma2_w.clone())?;
        ensure!(qos.num_users() == network.num_users(), "QoS has {} users", qos.num_users());
        Ok((network, channel, qos))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("snapshot serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("invalid snapshot {}", path.display()))
    }
}
