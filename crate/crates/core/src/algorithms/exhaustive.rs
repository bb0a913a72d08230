use super::{complement, AlgorithmConfig, AlgorithmRun, Runner};
use crate::conic::ProblemData;
use crate::error::{Error, Result};
use crate::model::SolveOutcome;
use crate::scalar::Real;

/// Solves P(A) for every nonempty subset `A` and keeps the cheapest.
///
/// Subsets are visited in increasing bitmask order (bit `l` set means RRH `l` is
/// active); ties keep the first subset visited.
pub fn exhaustive_search<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let num_rrh = data.num_rrh();
    if num_rrh > config.exhaustive_cap {
        return Err(Error::ExhaustiveCap { num_rrh, cap: config.exhaustive_cap });
    }
    let mut runner = Runner::new(data, config);
    let result = (|| {
        let mut best: Option<SolveOutcome<T>> = None;
        for mask in 1u64..(1u64 << num_rrh) {
            let set: Vec<usize> = (0..num_rrh).filter(|l| mask >> l & 1 == 1).collect();
            let out = runner.power_min(&set, None)?;
            if out.is_optimal() && best.as_ref().is_none_or(|b| out.network_power < b.network_power) {
                best = Some(out);
            }
        }
        if let Some(b) = &best {
            runner.trace.switched_off = complement(num_rrh, &b.active_set);
        }
        Ok(best.unwrap_or_else(|| SolveOutcome::infeasible(runner.count())))
    })();
    runner.finish(result)
}
