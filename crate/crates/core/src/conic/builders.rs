use std::time::Instant;

use num_complex::Complex;

use super::{solve_socp, AffineRow, ConeOrigin, ConicProblem, SocpSolution, SolverSettings};
use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::model::{Beamformer, PowerModel, QosSpec, SolveOutcome, SolveStatus};
use crate::scalar::{lit, norm_sqr, Real};

/// The data every beamforming problem is built from.
#[derive(Debug, Clone, Copy)]
pub struct ProblemData<'a, T> {
    pub channel: &'a ChannelState<T>,
    pub qos: &'a QosSpec<T>,
    pub model: &'a PowerModel<T>,
}

impl<'a, T: Real> ProblemData<'a, T> {
    pub fn new(channel: &'a ChannelState<T>, qos: &'a QosSpec<T>, model: &'a PowerModel<T>) -> Result<Self> {
        if channel.num_users() != qos.num_users() {
            return Err(Error::Dimension(format!(
                "channel has {} users, QoS spec {}",
                channel.num_users(),
                qos.num_users()
            )));
        }
        if channel.num_rrh() != model.num_rrh() {
            return Err(Error::Dimension(format!(
                "channel has {} RRHs, power model {}",
                channel.num_rrh(),
                model.num_rrh()
            )));
        }
        Ok(Self { channel, qos, model })
    }

    pub fn num_rrh(&self) -> usize {
        self.channel.num_rrh()
    }

    pub fn num_users(&self) -> usize {
        self.channel.num_users()
    }

    pub fn antennas(&self) -> &[usize] {
        self.channel.antennas()
    }

    pub fn all_rrhs(&self) -> Vec<usize> {
        (0..self.num_rrh()).collect()
    }
}

/// Maps the beamforming coefficients of the RRHs in a set to real variables.
///
/// For the `p`-th RRH of the set, coefficient `w_lk[n]` occupies variables
/// `offset_p + 2(k N_l + n)` (real part) and the next one (imaginary part).
/// Auxiliary variables start at [`BeamLayout::num_beam_vars`].
#[derive(Debug, Clone, PartialEq)]
pub struct BeamLayout {
    rrhs: Vec<usize>,
    antennas: Vec<usize>,
    num_users: usize,
    offsets: Vec<usize>,
}

impl BeamLayout {
    pub fn new(rrhs: &[usize], antennas: &[usize], num_users: usize) -> Self {
        let mut offsets = vec![0];
        for &l in rrhs {
            offsets.push(offsets.last().unwrap() + 2 * antennas[l] * num_users);
        }
        Self { rrhs: rrhs.to_vec(), antennas: antennas.to_vec(), num_users, offsets }
    }

    pub fn rrhs(&self) -> &[usize] {
        &self.rrhs
    }

    pub fn num_beam_vars(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Variable index of `Re w_lk[n]` for the `pos`-th RRH of the set.
    pub fn re(&self, pos: usize, k: usize, n: usize) -> usize {
        self.offsets[pos] + 2 * (k * self.antennas[self.rrhs[pos]] + n)
    }

    /// All variables of group `pos`.
    pub fn group_vars(&self, pos: usize) -> std::ops::Range<usize> {
        self.offsets[pos]..self.offsets[pos + 1]
    }

    /// Rows `Re(c h_k^H w_i)` and `Im(c h_k^H w_i)` for the channel of user `k`.
    fn inner_rows<T: Real>(&self, channel: &ChannelState<T>, k: usize, i: usize, c: T) -> [AffineRow<T>; 2] {
        let mut re = Vec::new();
        let mut im = Vec::new();
        for (pos, &l) in self.rrhs.iter().enumerate() {
            for (n, h) in channel.block(k, l).iter().enumerate() {
                let v = self.re(pos, i, n);
                // conj(h) w = (hr wr + hi wi) + j (hr wi - hi wr)
                re.push((v, c * h.re));
                re.push((v + 1, c * h.im));
                im.push((v, -c * h.im));
                im.push((v + 1, c * h.re));
            }
        }
        [AffineRow { terms: re, constant: T::zero() }, AffineRow { terms: im, constant: T::zero() }]
    }

    fn group_rows<T: Real>(&self, pos: usize, c: T) -> impl Iterator<Item = AffineRow<T>> + '_ {
        self.group_vars(pos).map(move |v| AffineRow::var(v, c))
    }

    /// Reads the beamformer out of a solution vector; groups outside the set stay zero.
    pub fn extract<T: Real>(&self, x: &[T]) -> Beamformer<T> {
        let mut w = Beamformer::zeros(&self.antennas, self.num_users);
        for (pos, &l) in self.rrhs.iter().enumerate() {
            for k in 0..self.num_users {
                for (n, c) in w.block_mut(l, k).iter_mut().enumerate() {
                    let v = self.re(pos, k, n);
                    *c = Complex::new(x[v], x[v + 1]);
                }
            }
        }
        w
    }
}

/// SINR cones over the RRHs of `layout`: one SOC per user, scaled by `1/σ_k`.
fn add_sinr_cones<T: Real>(p: &mut ConicProblem<T>, layout: &BeamLayout, data: &ProblemData<'_, T>) {
    for k in 0..data.num_users() {
        let inv_sigma = T::one() / data.qos.sigma2(k).sqrt();
        let [lead, _] = layout.inner_rows(data.channel, k, k, inv_sigma / data.qos.gamma(k).sqrt());
        let mut rows = vec![lead];
        for i in (0..data.num_users()).filter(|&i| i != k) {
            rows.extend(layout.inner_rows(data.channel, k, i, inv_sigma));
        }
        rows.push(AffineRow::constant(T::one()));
        p.add_soc(ConeOrigin::Sinr(k), rows);
    }
}

/// Power caps: `||w̃_l|| <= sqrt(P_l)` for each RRH of the set.
fn add_power_caps<T: Real>(p: &mut ConicProblem<T>, layout: &BeamLayout, model: &PowerModel<T>) {
    for (pos, &l) in layout.rrhs.iter().enumerate() {
        let mut rows = vec![AffineRow::constant(model.p_max(l).sqrt())];
        rows.extend(layout.group_rows(pos, T::one()));
        p.add_soc(ConeOrigin::PowerCap(l), rows);
    }
}

/// `t >= ||w̃_l||^2` as `||(2 w̃_l, t - 1)|| <= t + 1`.
fn add_epigraph<T: Real>(p: &mut ConicProblem<T>, layout: &BeamLayout, pos: usize, t: usize) {
    let l = layout.rrhs[pos];
    let mut rows = vec![AffineRow { terms: vec![(t, T::one())], constant: T::one() }];
    rows.extend(layout.group_rows(pos, lit(2.0)));
    rows.push(AffineRow { terms: vec![(t, T::one())], constant: -T::one() });
    p.add_soc(ConeOrigin::Epigraph(l), rows);
}

fn check_set(set: &[usize], num_rrh: usize) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::Contract("active set must be nonempty".into()));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return Err(Error::Contract(format!("duplicate RRH in active set {set:?}")));
    }
    if let Some(&l) = sorted.last().filter(|&&l| l >= num_rrh) {
        return Err(Error::Dimension(format!("RRH index {l} out of range")));
    }
    Ok(sorted)
}

/// `Σ_k γ_k σ_k^2 / Σ_{l∈A} η_l ||h_kl||^2`: each user served alone, caps ignored.
///
/// A lower bound on the optimum of P(A), used to bring the objective the solver
/// sees to order one (its gap tests are absolute below one).
fn transmit_floor<T: Real>(set: &[usize], data: &ProblemData<'_, T>, use_eta: bool) -> T {
    let floor = (0..data.num_users()).fold(T::zero(), |acc, k| {
        let gain = set.iter().fold(T::zero(), |g, &l| {
            let eta = if use_eta { data.model.eta(l) } else { T::one() };
            g + eta * norm_sqr(data.channel.block(k, l))
        });
        acc + data.qos.gamma(k) * data.qos.sigma2(k) / gain
    });
    if floor.is_finite() && floor > T::zero() {
        floor
    } else {
        T::one()
    }
}

/// P(A): minimum transmit power using only the RRHs in `active`, under SINR cones and power caps.
///
/// Variables: the beamformer coefficients of the RRHs in `A`, then one epigraph
/// variable `t_l` per RRH of `A`. The objective is `Σ t_l / η_l`.
pub fn build_power_min<T: Real>(active: &[usize], data: &ProblemData<'_, T>) -> Result<(ConicProblem<T>, BeamLayout)> {
    let set = check_set(active, data.num_rrh())?;
    let layout = BeamLayout::new(&set, data.antennas(), data.num_users());
    let nb = layout.num_beam_vars();
    let mut p = ConicProblem::new(nb + set.len());
    let mut c = vec![T::zero(); nb + set.len()];
    let scale = transmit_floor(&set, data, true);
    for (pos, &l) in set.iter().enumerate() {
        c[nb + pos] = T::one() / (data.model.eta(l) * scale);
    }
    p.set_objective(c, scale);
    add_sinr_cones(&mut p, &layout, data);
    add_power_caps(&mut p, &layout, data.model);
    for pos in 0..set.len() {
        add_epigraph(&mut p, &layout, pos, nb + pos);
    }
    Ok((p, layout))
}

/// Solves P(A) and packages the result; counts as one SOCP.
pub fn solve_power_min<T: Real>(
    active: &[usize],
    data: &ProblemData<'_, T>,
    settings: &SolverSettings<T>,
) -> Result<SolveOutcome<T>> {
    let start = Instant::now();
    let (problem, layout) = build_power_min(active, data)?;
    let mut out = match solve_socp(&problem, settings) {
        SocpSolution::Optimal { x, .. } => {
            let w = layout.extract(&x);
            let transmit = w.transmit_power(data.model);
            let network = transmit + data.model.transport_delta_sum(layout.rrhs());
            SolveOutcome {
                status: SolveStatus::Optimal,
                active_set: layout.rrhs().to_vec(),
                beamformer: Some(w),
                transmit_power: Some(transmit),
                network_power: Some(network),
                socp_count: 1,
                wall_time: Default::default(),
                diagnostic: None,
            }
        }
        SocpSolution::Infeasible { .. } => SolveOutcome::infeasible(1),
        SocpSolution::Failure { reason } => {
            SolveOutcome::failure(1, format!("P(A) with A = {:?}: {reason}", layout.rrhs()))
        }
    };
    out.wall_time = start.elapsed();
    Ok(out)
}

/// A beamformer-valued solve that is not P(A) itself.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSolve<T> {
    pub status: SolveStatus,
    pub beamformer: Option<Beamformer<T>>,
    /// Optimal objective value.
    pub objective: Option<T>,
    pub diagnostic: Option<String>,
}

impl<T> BeamSolve<T> {
    fn from_solution(sol: SocpSolution<T>, extract: impl FnOnce(&[T]) -> Beamformer<T>) -> Self {
        match sol {
            SocpSolution::Optimal { x, objective, .. } => Self {
                status: SolveStatus::Optimal,
                beamformer: Some(extract(&x)),
                objective: Some(objective),
                diagnostic: None,
            },
            SocpSolution::Infeasible { .. } => {
                Self { status: SolveStatus::Infeasible, beamformer: None, objective: None, diagnostic: None }
            }
            SocpSolution::Failure { reason } => Self {
                status: SolveStatus::SolverFailure,
                beamformer: None,
                objective: None,
                diagnostic: Some(reason),
            },
        }
    }
}

/// `minimize Σ_l β_l ||w̃_l||` subject to the SINR cones and power caps of all RRHs.
///
/// Variables: all beamformer coefficients, then `u_l` with `||w̃_l|| <= u_l`.
/// The weights are normalized before reaching the solver; the problem's
/// objective scale restores the original value.
pub fn build_weighted_group_norm<T: Real>(weights: &[T], data: &ProblemData<'_, T>) -> Result<(ConicProblem<T>, BeamLayout)> {
    let num_rrh = data.num_rrh();
    if weights.len() != num_rrh {
        return Err(Error::Dimension(format!("{} weights for {num_rrh} RRHs", weights.len())));
    }
    if weights.iter().any(|b| !b.is_finite() || *b < T::zero()) {
        return Err(Error::Domain("weights must be finite and non-negative".into()));
    }
    let bmax = weights.iter().copied().fold(T::zero(), T::max);
    if !(bmax > T::zero()) {
        return Err(Error::Contract("all group weights are zero".into()));
    }
    let layout = BeamLayout::new(&data.all_rrhs(), data.antennas(), data.num_users());
    let nb = layout.num_beam_vars();
    let mut p = ConicProblem::new(nb + num_rrh);
    let mut c = vec![T::zero(); nb + num_rrh];
    let scale = bmax * transmit_floor(&data.all_rrhs(), data, false).sqrt();
    for (l, &b) in weights.iter().enumerate() {
        c[nb + l] = b / scale;
    }
    p.set_objective(c, scale);
    add_sinr_cones(&mut p, &layout, data);
    add_power_caps(&mut p, &layout, data.model);
    for l in 0..num_rrh {
        let mut rows = vec![AffineRow::var(nb + l, T::one())];
        rows.extend(layout.group_rows(l, T::one()));
        p.add_soc(ConeOrigin::GroupNorm(l), rows);
    }
    Ok((p, layout))
}

pub fn solve_weighted_group_norm<T: Real>(
    weights: &[T],
    data: &ProblemData<'_, T>,
    settings: &SolverSettings<T>,
) -> Result<BeamSolve<T>> {
    let (problem, layout) = build_weighted_group_norm(weights, data)?;
    Ok(BeamSolve::from_solution(solve_socp(&problem, settings), |x| layout.extract(x)))
}

/// Result of the relaxed mixed-integer problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSolve<T> {
    pub solve: BeamSolve<T>,
    /// Relaxed activity `z_l ∈ [0, 1]` per RRH, when optimal.
    pub activity: Option<Vec<T>>,
}

/// Continuous relaxation of the joint selection problem:
///
/// `minimize Σ_l (t_l / η_l + z_l P^c_l)` subject to the SINR cones of all RRHs,
/// `t_l >= ||w̃_l||^2`, `||w̃_l||^2 <= z_l P_l` and `0 <= z_l <= 1`.
///
/// Variables: beamformer coefficients, then `t_l`, then `z_l`.
pub fn build_rminlp_relaxation<T: Real>(data: &ProblemData<'_, T>) -> (ConicProblem<T>, BeamLayout) {
    let num_rrh = data.num_rrh();
    let layout = BeamLayout::new(&data.all_rrhs(), data.antennas(), data.num_users());
    let nb = layout.num_beam_vars();
    let (t0, z0) = (nb, nb + num_rrh);
    let mut p = ConicProblem::new(nb + 2 * num_rrh);
    let mut c = vec![T::zero(); nb + 2 * num_rrh];
    for l in 0..num_rrh {
        c[t0 + l] = T::one() / data.model.eta(l);
        c[z0 + l] = data.model.p_delta(l);
    }
    p.set_objective(c, T::one());
    add_sinr_cones(&mut p, &layout, data);
    for l in 0..num_rrh {
        add_epigraph(&mut p, &layout, l, t0 + l);
        // ||w̃||^2 <= z P  as  ||(2 w̃, zP - 1)|| <= zP + 1
        let pm = data.model.p_max(l);
        let mut rows = vec![AffineRow { terms: vec![(z0 + l, pm)], constant: T::one() }];
        rows.extend(layout.group_rows(l, lit(2.0)));
        rows.push(AffineRow { terms: vec![(z0 + l, pm)], constant: -T::one() });
        p.add_soc(ConeOrigin::RelaxedCap(l), rows);
        p.add_nonneg(
            ConeOrigin::ActivityBounds(l),
            vec![AffineRow::var(z0 + l, T::one()), AffineRow { terms: vec![(z0 + l, -T::one())], constant: T::one() }],
        );
    }
    (p, layout)
}

pub fn solve_rminlp_relaxation<T: Real>(data: &ProblemData<'_, T>, settings: &SolverSettings<T>) -> RelaxationSolve<T> {
    let (problem, layout) = build_rminlp_relaxation(data);
    let z0 = layout.num_beam_vars() + data.num_rrh();
    let num_rrh = data.num_rrh();
    let sol = solve_socp(&problem, settings);
    let activity = match &sol {
        SocpSolution::Optimal { x, .. } => Some(x[z0..z0 + num_rrh].to_vec()),
        _ => None,
    };
    RelaxationSolve { solve: BeamSolve::from_solution(sol, |x| layout.extract(x)), activity }
}
