use crate::channel::ChannelState;
use crate::model::{Beamformer, PowerModel, QosSpec};
use crate::scalar::{inner, Real};

/// Achieved SINR of user `k` under beamformer `w`, using every RRH.
pub fn sinr<T: Real>(w: &Beamformer<T>, channel: &ChannelState<T>, qos: &QosSpec<T>, k: usize) -> T {
    let all: Vec<usize> = (0..channel.num_rrh()).collect();
    let h = channel.user_vector(k, &all);
    let mut interference = qos.sigma2(k);
    let mut signal = T::zero();
    for i in 0..channel.num_users() {
        let g = inner(&h, &w.user_vector(i, &all)).norm_sqr();
        if i == k {
            signal = g;
        } else {
            interference = interference + g;
        }
    }
    signal / interference
}

/// Residual report of a candidate beamformer against the QoS and power constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<T> {
    pub sinr: Vec<T>,
    /// `Σ_k ||w_lk||^2` per RRH.
    pub rrh_power: Vec<T>,
    pub sinr_ok: Vec<bool>,
    pub power_ok: Vec<bool>,
    /// RRHs outside the active set whose group is in the support.
    pub stray_groups: Vec<usize>,
}

impl<T: Real> VerificationReport<T> {
    pub fn passed(&self) -> bool {
        self.sinr_ok.iter().chain(&self.power_ok).all(|&b| b) && self.stray_groups.is_empty()
    }

    /// Smallest `SINR_k / γ_k`.
    pub fn worst_sinr_ratio(&self, qos: &QosSpec<T>) -> T {
        self.sinr
            .iter()
            .enumerate()
            .fold(T::infinity(), |m, (k, &s)| m.min(s / qos.gamma(k)))
    }
}

/// Checks `SINR_k >= γ_k (1 - tol)`, `Σ_k ||w_lk||^2 <= P_l (1 + tol)` and that
/// groups outside `active` carry no power.
pub fn verify_solution<T: Real>(
    w: &Beamformer<T>,
    active: &[usize],
    channel: &ChannelState<T>,
    qos: &QosSpec<T>,
    model: &PowerModel<T>,
    tol: T,
) -> VerificationReport<T> {
    let sinr: Vec<T> = (0..channel.num_users()).map(|k| sinr(w, channel, qos, k)).collect();
    let sinr_ok = sinr
        .iter()
        .enumerate()
        .map(|(k, &s)| s >= qos.gamma(k) * (T::one() - tol))
        .collect();
    let rrh_power: Vec<T> = (0..w.num_rrh()).map(|l| w.group_power(l)).collect();
    let power_ok = rrh_power
        .iter()
        .enumerate()
        .map(|(l, &p)| p <= model.p_max(l) * (T::one() + tol))
        .collect();
    let support = w.support();
    let stray_groups = (0..w.num_rrh()).filter(|l| support[*l] && !active.contains(l)).collect();
    VerificationReport { sinr, rrh_power, sinr_ok, power_ok, stray_groups }
}
