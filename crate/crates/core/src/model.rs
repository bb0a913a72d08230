//! Domain types and the Cloud-RAN network power model.
//!
//! Units are watts and meters throughout. Decibel quantities only appear at I/O
//! boundaries and go through the helpers in [`units`].

use std::time::Duration;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, norm, norm_sqr, Real};

/// Typical pico-cell RRH active power.
pub const PICO_ACTIVE_RRH_W: f64 = 6.8;
/// Typical pico-cell RRH sleep power.
pub const PICO_SLEEP_RRH_W: f64 = 4.3;
/// Typical RF power amplifier drain efficiency.
pub const PICO_DRAIN_EFFICIENCY: f64 = 4.0;
/// Optical line terminal power; the OLT never sleeps.
pub const PON_OLT_W: f64 = 20.0;
/// Optical network unit (transport link) power in active mode.
pub const PON_ACTIVE_LINK_W: f64 = 3.85;
/// Optical network unit (transport link) power in sleep mode.
pub const PON_SLEEP_LINK_W: f64 = 0.75;
/// Per-RRH maximum transmit power used by the reference simulations.
pub const DEFAULT_MAX_TX_W: f64 = 1.0;

/// Groups whose norm is at most this fraction of `max(1, ||w||)` count as switched off.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-6;

/// Decibel conversions. Only used when reading or writing configuration and results.
pub mod units {
    use crate::scalar::{lit, Real};

    pub fn db_to_linear<T: Real>(db: T) -> T {
        lit::<T>(10.0).powf(db / lit(10.0))
    }

    pub fn linear_to_db<T: Real>(x: T) -> T {
        lit::<T>(10.0) * x.log10()
    }

    pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
        db_to_linear(dbm - lit(30.0))
    }

    pub fn watts_to_dbm<T: Real>(w: T) -> T {
        linear_to_db(w) + lit(30.0)
    }
}

/// Raw per-RRH active/sleep power components of an RRH and its transport link.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerComponents<T> {
    pub p_active_rrh: T,
    pub p_sleep_rrh: T,
    pub p_active_tl: T,
    pub p_sleep_tl: T,
}

impl<T: Real> PowerComponents<T> {
    /// Pico-cell RRH attached through a passive optical network unit.
    pub fn pico_pon() -> Self {
        Self {
            p_active_rrh: lit(PICO_ACTIVE_RRH_W),
            p_sleep_rrh: lit(PICO_SLEEP_RRH_W),
            p_active_tl: lit(PON_ACTIVE_LINK_W),
            p_sleep_tl: lit(PON_SLEEP_LINK_W),
        }
    }

    /// Active-minus-sleep power of the RRH together with its link.
    pub fn delta(&self) -> T {
        (self.p_active_rrh + self.p_active_tl) - (self.p_sleep_rrh + self.p_sleep_tl)
    }
}

/// Per-RRH power parameters.
///
/// `p_delta[l]` is the power saved by putting RRH `l` and its transport link to
/// sleep. The remaining constants only matter for absolute bookkeeping
/// ([`rrh_power`], [`transport_power`]); the optimization never sees them.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel<T> {
    eta: Vec<T>,
    p_max: Vec<T>,
    p_delta: Vec<T>,
    p_olt: T,
    components: Vec<PowerComponents<T>>,
}

impl<T: Real> PowerModel<T> {
    /// Builds a model with explicit transport deltas. Bookkeeping constants take the
    /// pico/PON defaults.
    pub fn new(eta: Vec<T>, p_max: Vec<T>, p_delta: Vec<T>) -> Result<Self> {
        let n = eta.len();
        let components = vec![PowerComponents::pico_pon(); n];
        Self::validated(eta, p_max, p_delta, lit(PON_OLT_W), components)
    }

    /// Derives every `p_delta` from raw active/sleep components.
    pub fn from_components(
        eta: Vec<T>,
        p_max: Vec<T>,
        components: Vec<PowerComponents<T>>,
        p_olt: T,
    ) -> Result<Self> {
        let p_delta = components.iter().map(PowerComponents::delta).collect();
        Self::validated(eta, p_max, p_delta, p_olt, components)
    }

    /// `num_rrh` identical RRHs sharing efficiency, cap and transport delta.
    pub fn uniform(num_rrh: usize, eta: T, p_max: T, p_delta: T) -> Result<Self> {
        Self::new(vec![eta; num_rrh], vec![p_max; num_rrh], vec![p_delta; num_rrh])
    }

    /// Pico RRHs on a PON transport network with typical component powers.
    pub fn pico(num_rrh: usize) -> Self {
        Self::from_components(
            vec![lit(PICO_DRAIN_EFFICIENCY); num_rrh],
            vec![lit(DEFAULT_MAX_TX_W); num_rrh],
            vec![PowerComponents::pico_pon(); num_rrh],
            lit(PON_OLT_W),
        )
        .expect("pico constants are valid")
    }

    fn validated(
        eta: Vec<T>,
        p_max: Vec<T>,
        p_delta: Vec<T>,
        p_olt: T,
        components: Vec<PowerComponents<T>>,
    ) -> Result<Self> {
        let n = eta.len();
        if p_max.len() != n || p_delta.len() != n || components.len() != n {
            return Err(Error::Dimension(format!(
                "power model vectors disagree: eta {}, p_max {}, p_delta {}, components {}",
                n,
                p_max.len(),
                p_delta.len(),
                components.len()
            )));
        }
        for l in 0..n {
            if !(eta[l] > T::zero()) || !eta[l].is_finite() {
                return Err(Error::Domain(format!("eta[{l}] = {} must be positive", eta[l])));
            }
            if !(p_max[l] > T::zero()) || !p_max[l].is_finite() {
                return Err(Error::Domain(format!("p_max[{l}] = {} must be positive", p_max[l])));
            }
            if !(p_delta[l] >= T::zero()) || !p_delta[l].is_finite() {
                return Err(Error::Domain(format!(
                    "p_delta[{l}] = {} must be non-negative",
                    p_delta[l]
                )));
            }
        }
        Ok(Self { eta, p_max, p_delta, p_olt, components })
    }

    pub fn num_rrh(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self, l: usize) -> T {
        self.eta[l]
    }

    pub fn p_max(&self, l: usize) -> T {
        self.p_max[l]
    }

    pub fn p_delta(&self, l: usize) -> T {
        self.p_delta[l]
    }

    pub fn p_olt(&self) -> T {
        self.p_olt
    }

    pub fn components(&self, l: usize) -> &PowerComponents<T> {
        &self.components[l]
    }

    /// Sum of `p_delta` over a set of RRHs.
    pub fn transport_delta_sum(&self, rrhs: &[usize]) -> T {
        rrhs.iter().fold(T::zero(), |acc, &l| acc + self.p_delta[l])
    }
}

/// Per-user QoS targets.
#[derive(Debug, Clone, PartialEq)]
pub struct QosSpec<T> {
    gamma: Vec<T>,
    sigma2: Vec<T>,
}

impl<T: Real> QosSpec<T> {
    pub fn new(gamma: Vec<T>, sigma2: Vec<T>) -> Result<Self> {
        if gamma.len() != sigma2.len() || gamma.is_empty() {
            return Err(Error::Dimension(format!(
                "gamma has {} entries, sigma2 has {}",
                gamma.len(),
                sigma2.len()
            )));
        }
        if let Some(k) = gamma.iter().position(|g| !(*g > T::zero()) || !g.is_finite()) {
            return Err(Error::Domain(format!("gamma[{k}] must be positive")));
        }
        if let Some(k) = sigma2.iter().position(|s| !(*s > T::zero()) || !s.is_finite()) {
            return Err(Error::Domain(format!("sigma2[{k}] must be positive")));
        }
        Ok(Self { gamma, sigma2 })
    }

    /// Same SINR target (dB) and noise power (dBm) for all `num_users` users.
    pub fn uniform_db(num_users: usize, sinr_db: T, noise_dbm: T) -> Result<Self> {
        Self::new(
            vec![units::db_to_linear(sinr_db); num_users],
            vec![units::dbm_to_watts(noise_dbm); num_users],
        )
    }

    pub fn num_users(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self, k: usize) -> T {
        self.gamma[k]
    }

    pub fn sigma2(&self, k: usize) -> T {
        self.sigma2[k]
    }
}

/// Network topology plus power parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance<T> {
    antennas: Vec<usize>,
    num_users: usize,
    half_side: T,
    rrh_positions: Vec<[T; 2]>,
    user_positions: Vec<[T; 2]>,
    power: PowerModel<T>,
}

impl<T: Real> NetworkInstance<T> {
    /// Positions are meters inside the square `[-half_side, half_side]^2`.
    pub fn new(
        antennas: Vec<usize>,
        half_side: T,
        rrh_positions: Vec<[T; 2]>,
        user_positions: Vec<[T; 2]>,
        power: PowerModel<T>,
    ) -> Result<Self> {
        if antennas.is_empty() || user_positions.is_empty() {
            return Err(Error::Domain("need at least one RRH and one user".into()));
        }
        if let Some(l) = antennas.iter().position(|&n| n == 0) {
            return Err(Error::Domain(format!("RRH {l} has no antennas")));
        }
        if rrh_positions.len() != antennas.len() || power.num_rrh() != antennas.len() {
            return Err(Error::Dimension(format!(
                "{} antenna counts, {} RRH positions, {} power entries",
                antennas.len(),
                rrh_positions.len(),
                power.num_rrh()
            )));
        }
        if !(half_side > T::zero()) {
            return Err(Error::Domain("region half side must be positive".into()));
        }
        let inside = |p: &[T; 2]| p.iter().all(|c| c.is_finite() && c.abs() <= half_side);
        if !rrh_positions.iter().chain(&user_positions).all(inside) {
            return Err(Error::Domain("position outside the declared region".into()));
        }
        let num_users = user_positions.len();
        Ok(Self { antennas, num_users, half_side, rrh_positions, user_positions, power })
    }

    pub fn num_rrh(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn antennas(&self) -> &[usize] {
        &self.antennas
    }

    pub fn half_side(&self) -> T {
        self.half_side
    }

    pub fn rrh_positions(&self) -> &[[T; 2]] {
        &self.rrh_positions
    }

    pub fn user_positions(&self) -> &[[T; 2]] {
        &self.user_positions
    }

    pub fn power(&self) -> &PowerModel<T> {
        &self.power
    }

    /// Distance between RRH `l` and user `k`, meters.
    pub fn distance(&self, k: usize, l: usize) -> T {
        let [ux, uy] = self.user_positions[k];
        let [rx, ry] = self.rrh_positions[l];
        ((ux - rx) * (ux - rx) + (uy - ry) * (uy - ry)).sqrt()
    }
}

/// Aggregate beamformer `w`, stored group by group: group `l` is
/// `[w_l1; ...; w_lK]`, each block of length `N_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer<T> {
    antennas: Vec<usize>,
    num_users: usize,
    offsets: Vec<usize>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Beamformer<T> {
    pub fn zeros(antennas: &[usize], num_users: usize) -> Self {
        let mut offsets = Vec::with_capacity(antennas.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &n in antennas {
            acc += n * num_users;
            offsets.push(acc);
        }
        Self {
            antennas: antennas.to_vec(),
            num_users,
            offsets,
            coeffs: vec![Complex::new(T::zero(), T::zero()); acc],
        }
    }

    /// Wraps a flat coefficient vector laid out group by group.
    pub fn from_coeffs(antennas: &[usize], num_users: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        let mut w = Self::zeros(antennas, num_users);
        if coeffs.len() != w.coeffs.len() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                w.coeffs.len(),
                coeffs.len()
            )));
        }
        w.coeffs = coeffs;
        Ok(w)
    }

    pub fn num_rrh(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn antennas(&self) -> &[usize] {
        &self.antennas
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// The group `w̃_l`.
    pub fn group(&self, l: usize) -> &[Complex<T>] {
        &self.coeffs[self.offsets[l]..self.offsets[l + 1]]
    }

    pub fn group_mut(&mut self, l: usize) -> &mut [Complex<T>] {
        let (a, b) = (self.offsets[l], self.offsets[l + 1]);
        &mut self.coeffs[a..b]
    }

    /// Range of group `l` inside the flat coefficient vector.
    pub fn group_range(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    /// The block `w_lk`.
    pub fn block(&self, l: usize, k: usize) -> &[Complex<T>] {
        let start = self.offsets[l] + k * self.antennas[l];
        &self.coeffs[start..start + self.antennas[l]]
    }

    pub fn block_mut(&mut self, l: usize, k: usize) -> &mut [Complex<T>] {
        let start = self.offsets[l] + k * self.antennas[l];
        let n = self.antennas[l];
        &mut self.coeffs[start..start + n]
    }

    pub fn group_norm(&self, l: usize) -> T {
        norm(self.group(l))
    }

    /// `Σ_k ||w_lk||^2`, the transmit power radiated by RRH `l`.
    pub fn group_power(&self, l: usize) -> T {
        norm_sqr(self.group(l))
    }

    pub fn norm(&self) -> T {
        norm(&self.coeffs)
    }

    /// Per-group "switched on" flags under the relative support threshold.
    pub fn support(&self) -> Vec<bool> {
        let thresh = lit::<T>(SUPPORT_REL_THRESHOLD) * T::one().max(self.norm());
        (0..self.num_rrh()).map(|l| self.group_norm(l) > thresh).collect()
    }

    /// Indices of groups in the support, ascending.
    pub fn active_groups(&self) -> Vec<usize> {
        self.support()
            .into_iter()
            .enumerate()
            .filter_map(|(l, on)| on.then_some(l))
            .collect()
    }

    /// `T(w) = Σ_l ||w̃_l||^2 / η_l`.
    pub fn transmit_power(&self, model: &PowerModel<T>) -> T {
        (0..self.num_rrh()).fold(T::zero(), |acc, l| acc + self.group_power(l) / model.eta(l))
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = *c * factor;
        }
        out
    }

    /// Coefficientwise sum; both beamformers must share a layout.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.antennas != other.antennas || self.num_users != other.num_users {
            return Err(Error::Dimension("beamformer layouts differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + *b;
        }
        Ok(out)
    }

    /// The per-user vector `w_k` restricted to `rrhs` (concatenated in the given order).
    pub fn user_vector(&self, k: usize, rrhs: &[usize]) -> Vec<Complex<T>> {
        rrhs.iter().flat_map(|&l| self.block(l, k).iter().copied()).collect()
    }
}

/// Outcome status of a solve or of a whole algorithm run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    SolverFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::SolverFailure => "failure",
        }
    }
}

/// Universal return value of the power-minimization solves and of every algorithm.
///
/// Power fields and the beamformer are present exactly when `status` is `Optimal`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<T> {
    pub status: SolveStatus,
    /// Active RRHs, ascending. Empty unless optimal.
    pub active_set: Vec<usize>,
    pub beamformer: Option<Beamformer<T>>,
    pub transmit_power: Option<T>,
    pub network_power: Option<T>,
    pub socp_count: usize,
    pub wall_time: Duration,
    pub diagnostic: Option<String>,
}

impl<T: Real> SolveOutcome<T> {
    pub fn infeasible(socp_count: usize) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            active_set: Vec::new(),
            beamformer: None,
            transmit_power: None,
            network_power: None,
            socp_count,
            wall_time: Duration::ZERO,
            diagnostic: None,
        }
    }

    pub fn failure(socp_count: usize, reason: impl Into<String>) -> Self {
        Self {
            status: SolveStatus::SolverFailure,
            diagnostic: Some(reason.into()),
            ..Self::infeasible(socp_count)
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Power drawn by RRH `l` when radiating `p_out` watts.
///
/// There is a deliberate jump at zero: any positive output costs the full active
/// power, whereas `p_out = 0` lets the RRH sleep.
pub fn rrh_power<T: Real>(p_out: T, l: usize, model: &PowerModel<T>) -> Result<T> {
    if !(p_out >= T::zero()) {
        return Err(Error::Domain(format!("negative transmit power {p_out}")));
    }
    let c = model.components(l);
    Ok(if p_out > T::zero() { c.p_active_rrh + p_out / model.eta(l) } else { c.p_sleep_rrh })
}

/// Total transport-network power for the given per-link activity flags (OLT included).
pub fn transport_power<T: Real>(active: &[bool], model: &PowerModel<T>) -> Result<T> {
    if active.len() != model.num_rrh() {
        return Err(Error::Dimension(format!(
            "{} link flags for {} RRHs",
            active.len(),
            model.num_rrh()
        )));
    }
    Ok(active.iter().enumerate().fold(model.p_olt(), |acc, (l, &on)| {
        let c = model.components(l);
        acc + if on { c.p_active_tl } else { c.p_sleep_tl }
    }))
}

/// `p(A, w)`: transmit power of the active RRHs plus their transport deltas.
///
/// The constant OLT and sleep powers are left out. Fails if a group outside
/// `active_set` carries power.
pub fn network_power<T: Real>(active_set: &[usize], w: &Beamformer<T>, model: &PowerModel<T>) -> Result<T> {
    let mut in_set = vec![false; w.num_rrh()];
    for &l in active_set {
        if l >= w.num_rrh() {
            return Err(Error::Dimension(format!("RRH index {l} out of range")));
        }
        in_set[l] = true;
    }
    let support = w.support();
    if let Some(l) = (0..w.num_rrh()).find(|&l| !in_set[l] && support[l]) {
        return Err(Error::Contract(format!("inactive RRH {l} has nonzero beamformer")));
    }
    Ok(active_set.iter().fold(T::zero(), |acc, &l| {
        acc + w.group_power(l) / model.eta(l) + model.p_delta(l)
    }))
}

/// `F(T(w))`: transport deltas of every group in the support of `w`.
pub fn support_transport_power<T: Real>(w: &Beamformer<T>, model: &PowerModel<T>) -> T {
    w.support()
        .into_iter()
        .enumerate()
        .filter(|(_, on)| *on)
        .fold(T::zero(), |acc, (l, _)| acc + model.p_delta(l))
}
