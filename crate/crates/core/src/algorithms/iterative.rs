use super::{conservative_walk, AlgorithmConfig, AlgorithmRun, Flow, Halt, Runner};
use crate::conic::ProblemData;
use crate::error::Result;
use crate::model::SolveOutcome;
use crate::scalar::Real;
use crate::sparsity::{initial_weights, log_sum_penalty, ordering_scores, reweight};

/// Iterative (reweighted) group-sparse beamforming.
///
/// Stage 1 minimizes the log-sum penalty by majorization-minimization: the first
/// weighted solve uses `β_l = sqrt(P^c_l/(η_l κ_l))`, each later one uses
/// `β_l = sqrt(P^c_l/η_l) / (||w̃_l|| + ε)` from the previous solution. It stops when
/// the penalty changes by less than `reweight_tol` (relative) or after
/// `max_reweight` solves (default `L`). `ε` is fixed after the first solve.
///
/// Stage 2 orders RRHs by the same score as bi-section GSBF; stage 3 walks the
/// order conservatively. At most `2L` SOCPs.
pub fn iterative_gsbf<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let mut runner = Runner::new(data, config);
    let result = (|| -> Flow<SolveOutcome<T>> {
        let num_rrh = data.num_rrh();
        let max_solves = config.max_reweight.unwrap_or(num_rrh).max(1);
        let first = runner.weighted(&initial_weights(data.channel, data.model)?)?;
        let Some(mut w) = first.beamformer else {
            return Ok(SolveOutcome::infeasible(runner.count()));
        };
        let largest = (0..num_rrh).map(|l| w.group_norm(l)).fold(T::zero(), T::max);
        let epsilon = config.epsilon_floor.max(config.epsilon_rel * largest);
        runner.trace.epsilon = Some(epsilon);
        let mut f = log_sum_penalty(&w, data.model, epsilon)?;
        runner.trace.log_sum_history.push(f);

        for iteration in 1..max_solves {
            let weights = reweight(&w, data.model, epsilon, iteration)?;
            let next = runner.weighted(&weights)?;
            w = next.beamformer.ok_or_else(|| {
                Halt::Failure(format!("reweighted problem {iteration} reported infeasible after a feasible start"))
            })?;
            let f_next = log_sum_penalty(&w, data.model, epsilon)?;
            runner.trace.log_sum_history.push(f_next);
            let change = (f - f_next).abs() / f.abs().max(T::min_positive_value());
            f = f_next;
            if change < config.reweight_tol {
                break;
            }
        }

        let order = ordering_scores(&w, data.channel, data.model).order;
        runner.trace.order = Some(order.clone());
        conservative_walk(&mut runner, &order)
    })();
    runner.finish(result)
}
