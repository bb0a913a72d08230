use std::collections::BTreeMap;

use super::{complement, AlgorithmConfig, AlgorithmRun, Flow, Runner};
use crate::conic::{solve_power_min, ProblemData, SolverSettings};
use crate::error::Result;
use crate::model::{SolveOutcome, SolveStatus};
use crate::scalar::Real;
use crate::sparsity::{ordering_scores, prop1_weights, sp_ordering_scores, GroupWeights};

/// Bi-section group-sparse beamforming.
///
/// 1. Solve the weighted group-norm problem with `β_l = sqrt(P^c_l/η_l)`.
/// 2. Order RRHs by ascending `θ_l = sqrt(κ_l η_l / P^c_l) (Σ_k ||ŵ_lk||)^{1/2}`.
/// 3. Binary-search the longest prefix of that order whose removal keeps P(A)
///    feasible, assuming feasibility is monotone along the order.
/// 4. Return P(A) for that prefix.
///
/// Uses at most `3 + ⌈log2(1 + L)⌉` SOCPs. [`scan_prefix_feasibility`] checks the
/// monotonicity assumption on a given instance.
pub fn bisection_gsbf<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let weights = prop1_weights(data.model);
    run_pipeline(data, config, &weights, |w| ordering_scores(w, data.channel, data.model).order)
}

/// The unweighted baseline: `β_l = 1` and the sparsity-only order
/// `θ_l = (Σ_k ||ŵ_lk||)^{1/2}`, with the same binary search.
pub fn sp_baseline<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let weights = GroupWeights::unweighted(data.num_rrh());
    run_pipeline(data, config, &weights, |w| sp_ordering_scores(w).order)
}

fn run_pipeline<T: Real>(
    data: &ProblemData<'_, T>,
    config: &AlgorithmConfig<T>,
    weights: &GroupWeights<T>,
    order_of: impl Fn(&crate::model::Beamformer<T>) -> Vec<usize>,
) -> Result<AlgorithmRun<T>> {
    let mut runner = Runner::new(data, config);
    let result = (|| -> Flow<SolveOutcome<T>> {
        let sparse = runner.weighted(weights)?;
        let Some(w_hat) = sparse.beamformer else {
            return Ok(SolveOutcome::infeasible(runner.count()));
        };
        let order = order_of(&w_hat);
        runner.trace.order = Some(order.clone());
        let num_rrh = data.num_rrh();

        // Invariant: removing order[..lo] is feasible, removing order[..up] is not.
        let (mut lo, mut up) = (0, num_rrh);
        let mut cache = BTreeMap::new();
        while up - lo > 1 {
            let mid = (lo + up) / 2;
            let out = runner.power_min(&complement(num_rrh, &order[..mid]), Some(order[mid - 1]))?;
            if out.is_optimal() {
                lo = mid;
                cache.insert(mid, out);
            } else {
                up = mid;
            }
        }
        let out = match cache.remove(&lo) {
            Some(out) => out,
            None => runner.power_min(&complement(num_rrh, &order[..lo]), None)?,
        };
        if out.is_optimal() {
            runner.trace.switched_off = order[..lo].to_vec();
        }
        Ok(out)
    })();
    runner.finish(result)
}

/// Feasibility of P(L \ order[..i]) for every `i = 0..L` (the empty set at `i = L`
/// is reported infeasible without a solve). A solver failure is returned as an error
/// string.
pub fn scan_prefix_feasibility<T: Real>(
    order: &[usize],
    data: &ProblemData<'_, T>,
    settings: &SolverSettings<T>,
) -> Result<std::result::Result<Vec<bool>, String>> {
    let num_rrh = data.num_rrh();
    let mut flags = Vec::with_capacity(num_rrh + 1);
    for i in 0..num_rrh {
        let out = solve_power_min(&complement(num_rrh, &order[..i]), data, settings)?;
        match out.status {
            SolveStatus::Optimal => flags.push(true),
            SolveStatus::Infeasible => flags.push(false),
            SolveStatus::SolverFailure => return Ok(Err(out.diagnostic.unwrap_or_default())),
        }
    }
    flags.push(false);
    Ok(Ok(flags))
}

/// True when the flags are a run of `true` followed by a run of `false`.
pub fn is_monotone(flags: &[bool]) -> bool {
    flags.windows(2).all(|p| p[0] || !p[1])
}
