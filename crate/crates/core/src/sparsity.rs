//! Group-sparsity functionals over the RRH partition of a beamformer.
//!
//! The convex envelope of the network power, `Ω(w) = 2 Σ_l sqrt(P^c_l/η_l) ||w̃_l||`,
//! its dual norm, the log-sum penalty used by the reweighted scheme, the
//! weight rules, and the RRH ordering scores all live here.

use std::cmp::Ordering;

use crate::channel::{channel_power_gain, ChannelState};
use crate::error::{Error, Result};
use crate::model::{support_transport_power, Beamformer, PowerModel};
use crate::scalar::{lit, norm, Real};

/// Where a weight vector came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind<T> {
    /// `sqrt(P^c_l / η_l)`.
    TransportRatio,
    /// `sqrt(P^c_l / (η_l κ_l))`, the starting point of the reweighted scheme.
    Initial,
    /// `sqrt(P^c_l / η_l) / (||w̃_l|| + ε)` after `iteration` weighted solves.
    Reweighted { iteration: usize, epsilon: T, lambda: T },
    /// All ones.
    Unweighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupWeights<T> {
    values: Vec<T>,
    kind: WeightKind<T>,
}

impl<T: Real> GroupWeights<T> {
    pub fn new(values: Vec<T>, kind: WeightKind<T>) -> Result<Self> {
        if values.iter().any(|b| !b.is_finite() || *b < T::zero()) {
            return Err(Error::Domain("group weights must be finite and non-negative".into()));
        }
        Ok(Self { values, kind })
    }

    pub fn unweighted(num_rrh: usize) -> Self {
        Self { values: vec![T::one(); num_rrh], kind: WeightKind::Unweighted }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kind(&self) -> WeightKind<T> {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn sqrt_ratio<T: Real>(model: &PowerModel<T>, l: usize) -> T {
    (model.p_delta(l) / model.eta(l)).sqrt()
}

/// `Σ_l β_l ||w̃_l||`.
pub fn mixed_l1_l2<T: Real>(w: &Beamformer<T>, weights: &GroupWeights<T>) -> Result<T> {
    if weights.len() != w.num_rrh() {
        return Err(Error::Dimension(format!("{} weights for {} groups", weights.len(), w.num_rrh())));
    }
    Ok(weights
        .values
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (l, &b)| acc + b * w.group_norm(l)))
}

/// `β_l = sqrt(P^c_l / η_l)`.
pub fn prop1_weights<T: Real>(model: &PowerModel<T>) -> GroupWeights<T> {
    GroupWeights {
        values: (0..model.num_rrh()).map(|l| sqrt_ratio(model, l)).collect(),
        kind: WeightKind::TransportRatio,
    }
}

/// `Ω(w) = 2 Σ_l sqrt(P^c_l/η_l) ||w̃_l||`, the convex positively homogeneous
/// lower bound of the network power.
pub fn omega<T: Real>(w: &Beamformer<T>, model: &PowerModel<T>) -> Result<T> {
    Ok(lit::<T>(2.0) * mixed_l1_l2(w, &prop1_weights(model))?)
}

/// `Ω*(y) = ½ max_l sqrt(η_l/P^c_l) ||y_{G_l}||`, with `y` laid out like a beamformer.
pub fn omega_dual<T: Real>(y: &Beamformer<T>, model: &PowerModel<T>) -> Result<T> {
    if y.num_rrh() != model.num_rrh() {
        return Err(Error::Dimension(format!("{} groups for {} RRHs", y.num_rrh(), model.num_rrh())));
    }
    let mut best = T::zero();
    for l in 0..model.num_rrh() {
        if !(model.p_delta(l) > T::zero()) {
            return Err(Error::Domain(format!("dual norm undefined: P^c[{l}] = 0")));
        }
        best = best.max((model.eta(l) / model.p_delta(l)).sqrt() * y.group_norm(l));
    }
    Ok(best / lit(2.0))
}

/// Real pairing `Re Σ_i w_i y_i` between a beamformer and a dual vector.
pub fn pairing<T: Real>(w: &Beamformer<T>, y: &Beamformer<T>) -> Result<T> {
    if w.coeffs().len() != y.coeffs().len() {
        return Err(Error::Dimension("pairing of differently shaped vectors".into()));
    }
    Ok(w.coeffs().iter().zip(y.coeffs()).fold(T::zero(), |acc, (a, b)| acc + (a * b).re))
}

/// The dual vector attaining `Re<w, y> = Ω(w)` with `Ω*(y) = 1`:
/// `y_{G_l} = 2 sqrt(P^c_l/η_l) conj(w̃_l) / ||w̃_l||` on nonzero groups, zero elsewhere.
pub fn aligned_dual<T: Real>(w: &Beamformer<T>, model: &PowerModel<T>) -> Beamformer<T> {
    let mut y = Beamformer::zeros(w.antennas(), w.num_users());
    for l in 0..w.num_rrh() {
        let n = w.group_norm(l);
        if n > T::zero() {
            let s = lit::<T>(2.0) * sqrt_ratio(model, l) / n;
            for (dst, src) in y.group_mut(l).iter_mut().zip(w.group(l)) {
                *dst = src.conj() * s;
            }
        }
    }
    y
}

/// `p_h(w) = 2 sqrt(T(w) F(T(w)))`.
pub fn homogeneous_lower_bound<T: Real>(w: &Beamformer<T>, model: &PowerModel<T>) -> T {
    lit::<T>(2.0) * (w.transmit_power(model) * support_transport_power(w, model)).sqrt()
}

/// `λ_ε = 2 / ln(1 + 1/ε)`.
pub fn log_sum_lambda<T: Real>(epsilon: T) -> T {
    lit::<T>(2.0) / (T::one() / epsilon).ln_1p()
}

/// `f(w) = λ_ε Σ_l sqrt(P^c_l/η_l) ln(1 + ||w̃_l||/ε)`.
pub fn log_sum_penalty<T: Real>(w: &Beamformer<T>, model: &PowerModel<T>, epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    let sum = (0..w.num_rrh()).fold(T::zero(), |acc, l| {
        acc + sqrt_ratio(model, l) * (w.group_norm(l) / epsilon).ln_1p()
    });
    Ok(log_sum_lambda(epsilon) * sum)
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")))
    }
}

/// `β_l = sqrt(P^c_l/η_l) / (||w̃_l|| + ε)`, tagged with the iteration that produced `w_prev`.
pub fn reweight<T: Real>(
    w_prev: &Beamformer<T>,
    model: &PowerModel<T>,
    epsilon: T,
    iteration: usize,
) -> Result<GroupWeights<T>> {
    check_epsilon(epsilon)?;
    let values = (0..w_prev.num_rrh())
        .map(|l| sqrt_ratio(model, l) / (w_prev.group_norm(l) + epsilon))
        .collect();
    GroupWeights::new(values, WeightKind::Reweighted { iteration, epsilon, lambda: log_sum_lambda(epsilon) })
}

/// `β_l = sqrt(P^c_l / (η_l κ_l))`.
pub fn initial_weights<T: Real>(channel: &ChannelState<T>, model: &PowerModel<T>) -> Result<GroupWeights<T>> {
    let values = (0..model.num_rrh())
        .map(|l| {
            let kappa = channel_power_gain(channel, l);
            if kappa > T::zero() {
                Ok((model.p_delta(l) / (model.eta(l) * kappa)).sqrt())
            } else {
                Err(Error::Domain(format!("RRH {l} has zero channel power gain")))
            }
        })
        .collect::<Result<_>>()?;
    GroupWeights::new(values, WeightKind::Initial)
}

/// Per-RRH scores and the ascending switch-off order they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct RrhOrdering<T> {
    pub scores: Vec<T>,
    /// RRH indices by ascending score, ties by ascending index.
    pub order: Vec<usize>,
}

impl<T: Real> RrhOrdering<T> {
    fn from_scores(scores: Vec<T>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        Self { scores, order }
    }
}

fn block_norm_sum<T: Real>(w: &Beamformer<T>, l: usize) -> T {
    (0..w.num_users()).fold(T::zero(), |acc, k| acc + norm(w.block(l, k)))
}

/// `θ_l = sqrt(κ_l η_l / P^c_l) · (Σ_k ||ŵ_lk||)^{1/2}`; smaller scores are switched off first.
///
/// An RRH with `P^c_l = 0` costs nothing to keep, so it scores `+∞` (or `0` if its
/// group is empty).
pub fn ordering_scores<T: Real>(
    w_hat: &Beamformer<T>,
    channel: &ChannelState<T>,
    model: &PowerModel<T>,
) -> RrhOrdering<T> {
    let scores = (0..w_hat.num_rrh())
        .map(|l| {
            let gain = block_norm_sum(w_hat, l).sqrt();
            if gain == T::zero() {
                T::zero()
            } else if model.p_delta(l) > T::zero() {
                (channel_power_gain(channel, l) * model.eta(l) / model.p_delta(l)).sqrt() * gain
            } else {
                T::infinity()
            }
        })
        .collect();
    RrhOrdering::from_scores(scores)
}

/// Sparsity-only scores `θ_l = (Σ_k ||ŵ_lk||)^{1/2}`.
pub fn sp_ordering_scores<T: Real>(w_hat: &Beamformer<T>) -> RrhOrdering<T> {
    RrhOrdering::from_scores((0..w_hat.num_rrh()).map(|l| block_norm_sum(w_hat, l).sqrt()).collect())
}

/// Ascending order of arbitrary scores, ties by index.
pub fn ascending_order<T: Real>(scores: &[T]) -> Vec<usize> {
    RrhOrdering::from_scores(scores.to_vec()).order
}
