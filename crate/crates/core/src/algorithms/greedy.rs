use super::{best_stage, AlgorithmConfig, AlgorithmRun, Runner};
use crate::conic::ProblemData;
use crate::error::Result;
use crate::model::SolveOutcome;
use crate::scalar::Real;

/// Greedy selection: starting from all RRHs, repeatedly switch off the RRH whose
/// removal leaves the cheapest feasible set, and return the cheapest set visited.
///
/// Each stage solves P(A \ {m}) for every `m` in the current set `A`, so the
/// number of SOCPs is at most `1 + L(L+1)/2`. Ties go to the lowest RRH index.
/// Removing the last RRH leaves nothing to solve and counts as infeasible.
pub fn greedy_selection<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let mut runner = Runner::new(data, config);
    let result = (|| {
        let mut current = data.all_rrhs();
        let first = runner.power_min(&current, None)?;
        if !first.is_optimal() {
            return Ok(first);
        }
        let mut stages = vec![first];
        let mut removed_seq = Vec::new();
        while current.len() > 1 {
            let mut pick: Option<(usize, SolveOutcome<T>)> = None;
            for &m in &current {
                let cand: Vec<usize> = current.iter().copied().filter(|&l| l != m).collect();
                let out = runner.power_min(&cand, Some(m))?;
                if out.is_optimal() && pick.as_ref().is_none_or(|(_, b)| out.network_power < b.network_power) {
                    pick = Some((m, out));
                }
            }
            let Some((m, out)) = pick else { break };
            current.retain(|&l| l != m);
            removed_seq.push(m);
            stages.push(out);
        }
        let j = best_stage(&stages).expect("stage 0 is feasible");
        runner.trace.switched_off = removed_seq[..j].to_vec();
        Ok(stages.swap_remove(j))
    })();
    runner.finish(result)
}
