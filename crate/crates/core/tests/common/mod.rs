#![allow(dead_code)]

use gsbf_core::{generate_channel, generate_scenario, ChannelParams, ChannelState, PowerModel, QosSpec};
use num_complex::Complex64;

/// Owned instance: channel, QoS and power model.
pub struct Instance {
    pub channel: ChannelState<f64>,
    pub qos: QosSpec<f64>,
    pub model: PowerModel<f64>,
}

impl Instance {
    pub fn data(&self) -> gsbf_core::ProblemData<'_, f64> {
        gsbf_core::ProblemData::new(&self.channel, &self.qos, &self.model).unwrap()
    }
}

/// Random drop with the default channel model, `η = 4`, `P = 1 W`.
pub fn random_instance(seed: u64, l: usize, k: usize, n: usize, half_side: f64, sinr_db: f64, p_delta: Vec<f64>) -> Instance {
    assert_eq!(p_delta.len(), l);
    let model = PowerModel::new(vec![4.0; l], vec![1.0; l], p_delta).unwrap();
    let inst = generate_scenario(half_side, vec![n; l], k, model.clone(), seed).unwrap();
    let channel = generate_channel(&inst, &ChannelParams::default(), seed ^ 0x5eed).unwrap();
    let qos = QosSpec::uniform_db(k, sinr_db, -102.0).unwrap();
    Instance { channel, qos, model }
}

/// `P_l^c = 5 + l` watts, `l = 1..=L`.
pub fn staircase(l: usize) -> Vec<f64> {
    (1..=l).map(|i| 5.0 + i as f64).collect()
}

/// Unit-scale channel with i.i.d. standard complex Gaussian entries.
pub fn gaussian_channel(seed: u64, antennas: &[usize], k: usize) -> ChannelState<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let total: usize = antennas.iter().sum();
    let rows = (0..k)
        .map(|_| {
            (0..total)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    ChannelState::from_rows(antennas, rows).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
