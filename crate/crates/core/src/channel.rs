//! Random topologies and channel realizations.
//!
//! Channel model: `h_kl = 10^(-PL(d_kl)/20) * sqrt(φ * s_kl) * g_kl` with
//! `PL(d) = 148.1 + 37.6 log10(d[km])`, log-normal shadowing `s_kl = 10^(X/10)`,
//! `X ~ N(0, σ_s^2)` in dB, antenna gain `φ = 10^(9/10)` per link and Rayleigh fading
//! `g_kl ~ CN(0, I)`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{NetworkInstance, PowerModel};
use crate::scalar::{lit, norm_sqr, to_f64, Real};

/// Large-scale and small-scale channel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Path loss at 1 km, dB.
    pub pathloss_intercept_db: f64,
    /// Path-loss slope, dB per decade of distance.
    pub pathloss_slope_db: f64,
    /// Standard deviation of the dB-domain shadowing Gaussian.
    pub shadowing_sigma_db: f64,
    /// Transmit antenna gain, dBi.
    pub antenna_gain_dbi: f64,
    /// Draw log-normal shadowing (otherwise `s_kl = 1`).
    pub shadowing: bool,
    /// Draw Rayleigh fading (otherwise `g_kl` is all ones).
    pub fading: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            pathloss_intercept_db: 148.1,
            pathloss_slope_db: 37.6,
            shadowing_sigma_db: 8.0,
            antenna_gain_dbi: 9.0,
            shadowing: true,
            fading: true,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pathloss_slope_db > 0.0) {
            return Err(Error::Domain("path-loss slope must be positive".into()));
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err(Error::Domain("shadowing deviation must be non-negative".into()));
        }
        Ok(())
    }

    /// Linear antenna power gain `φ`.
    pub fn antenna_gain(&self) -> f64 {
        10f64.powf(self.antenna_gain_dbi / 10.0)
    }

    /// `E[s]` for the dB-domain log-normal shadowing: `exp((σ_s ln10 / 10)^2 / 2)`.
    pub fn mean_shadowing_gain(&self) -> f64 {
        if !self.shadowing {
            return 1.0;
        }
        let s = self.shadowing_sigma_db * std::f64::consts::LN_10 / 10.0;
        (0.5 * s * s).exp()
    }
}

/// Path loss in dB at `d_km` kilometers.
pub fn path_loss_db(d_km: f64, params: &ChannelParams) -> Result<f64> {
    if !(d_km > 0.0) || !d_km.is_finite() {
        return Err(Error::Domain(format!("distance {d_km} km must be positive")));
    }
    Ok(params.pathloss_intercept_db + params.pathloss_slope_db * d_km.log10())
}

/// Mixes a parent seed with a label (splitmix64 finalizer), so independent
/// entities drawn from one master seed get uncorrelated streams.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    let mut z = parent ^ label.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Drops `num_rrh` RRHs and `num_users` users uniformly in `[-half_side, half_side]^2`.
///
/// RRHs are drawn before users so that, for a fixed seed, RRH positions do not
/// depend on the number of users.
pub fn generate_scenario<T: Real>(
    half_side: T,
    antennas: Vec<usize>,
    num_users: usize,
    power: PowerModel<T>,
    seed: u64,
) -> Result<NetworkInstance<T>> {
    if !(half_side > T::zero()) {
        return Err(Error::Domain("region side must be positive".into()));
    }
    let h = to_f64(half_side);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> [T; 2] {
        let x: f64 = rng.random_range(-h..=h);
        let y: f64 = rng.random_range(-h..=h);
        [lit(x), lit(y)]
    };
    let rrh: Vec<[T; 2]> = (0..antennas.len()).map(|_| draw(&mut rng)).collect();
    let users: Vec<[T; 2]> = (0..num_users).map(|_| draw(&mut rng)).collect();
    NetworkInstance::new(antennas, half_side, rrh, users, power)
}

/// Channel blocks `h_kl ∈ C^{N_l}` for every user/RRH pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState<T> {
    antennas: Vec<usize>,
    offsets: Vec<usize>,
    /// Row `k` is `h_k` over all RRHs, concatenated in RRH order.
    rows: Vec<Vec<Complex<T>>>,
}

impl<T: Real> ChannelState<T> {
    /// Builds a state from per-user concatenated channel rows.
    pub fn from_rows(antennas: &[usize], rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let total: usize = antennas.iter().sum();
        if antennas.is_empty() || rows.is_empty() {
            return Err(Error::Domain("need at least one RRH and one user".into()));
        }
        if let Some(k) = rows.iter().position(|r| r.len() != total) {
            return Err(Error::Dimension(format!(
                "channel row {k} has {} entries, expected {total}",
                rows[k].len()
            )));
        }
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("non-finite channel entry".into()));
        }
        let mut offsets = vec![0];
        for &n in antennas {
            offsets.push(offsets.last().unwrap() + n);
        }
        Ok(Self { antennas: antennas.to_vec(), offsets, rows })
    }

    pub fn num_rrh(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_users(&self) -> usize {
        self.rows.len()
    }

    pub fn antennas(&self) -> &[usize] {
        &self.antennas
    }

    /// `h_kl`.
    pub fn block(&self, k: usize, l: usize) -> &[Complex<T>] {
        &self.rows[k][self.offsets[l]..self.offsets[l + 1]]
    }

    pub fn block_mut(&mut self, k: usize, l: usize) -> &mut [Complex<T>] {
        let (a, b) = (self.offsets[l], self.offsets[l + 1]);
        &mut self.rows[k][a..b]
    }

    /// `h_k` over the RRHs in `rrhs`, in that order.
    pub fn user_vector(&self, k: usize, rrhs: &[usize]) -> Vec<Complex<T>> {
        rrhs.iter().flat_map(|&l| self.block(k, l).iter().copied()).collect()
    }

    /// Rejects states with an unreachable RRH (`κ_l = 0`); the weighting rules divide by `κ_l`.
    pub fn validate(&self) -> Result<()> {
        for l in 0..self.num_rrh() {
            if !(channel_power_gain(self, l) > T::zero()) {
                return Err(Error::Domain(format!("RRH {l} has zero channel power gain")));
            }
        }
        Ok(())
    }
}

/// Draws one channel realization for `instance`. Deterministic in `seed`.
pub fn generate_channel<T: Real>(
    instance: &NetworkInstance<T>,
    params: &ChannelParams,
    seed: u64,
) -> Result<ChannelState<T>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shadow = Normal::new(0.0, params.shadowing_sigma_db)
        .map_err(|e| Error::Domain(format!("shadowing distribution: {e}")))?;
    let phi = params.antenna_gain();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows = Vec::with_capacity(instance.num_users());
    for k in 0..instance.num_users() {
        let mut row = Vec::new();
        for (l, &n) in instance.antennas().iter().enumerate() {
            let d_km = to_f64(instance.distance(k, l)) / 1000.0;
            let pl = path_loss_db(d_km, params)?;
            let s = if params.shadowing { 10f64.powf(shadow.sample(&mut rng) / 10.0) } else { 1.0 };
            let amp = 10f64.powf(-pl / 20.0) * (phi * s).sqrt();
            for _ in 0..n {
                let g = if params.fading {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex::new(re * half, im * half)
                } else {
                    Complex::new(1.0, 0.0)
                };
                row.push(Complex::new(lit(amp * g.re), lit(amp * g.im)));
            }
        }
        rows.push(row);
    }
    ChannelState::from_rows(instance.antennas(), rows)
}

/// `κ_l = Σ_k ||h_kl||^2`.
pub fn channel_power_gain<T: Real>(channel: &ChannelState<T>, l: usize) -> T {
    (0..channel.num_users()).fold(T::zero(), |acc, k| acc + norm_sqr(channel.block(k, l)))
}
