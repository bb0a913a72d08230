use super::{conservative_walk, AlgorithmConfig, AlgorithmRun, Flow, Halt, Runner};
use crate::conic::{solve_rminlp_relaxation, ProblemData};
use crate::error::Result;
use crate::model::{SolveOutcome, SolveStatus};
use crate::scalar::Real;
use crate::sparsity::ascending_order;

/// Deflation driven by the continuous relaxation of the joint selection problem.
///
/// The relaxation replaces each RRH's on/off decision by `z_l ∈ [0, 1]` and caps
/// its power at `z_l P_l` (see [`crate::conic::build_rminlp_relaxation`]). RRHs are
/// switched off in ascending `z_l` order (ties by index) with the same
/// conservative walk as iterative GSBF. At most `L + 1` SOCPs.
pub fn rminlp_deflation<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let mut runner = Runner::new(data, config);
    let result = (|| -> Flow<SolveOutcome<T>> {
        let relaxed = solve_rminlp_relaxation(data, &config.solver);
        runner.record_relaxation(relaxed.solve.status, relaxed.solve.objective);
        match relaxed.solve.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Ok(SolveOutcome::infeasible(runner.count())),
            SolveStatus::SolverFailure => {
                return Err(Halt::Failure(format!(
                    "relaxation: {}",
                    relaxed.solve.diagnostic.unwrap_or_default()
                )))
            }
        }
        let order = ascending_order(&relaxed.activity.expect("optimal relaxation has activities"));
        runner.trace.order = Some(order.clone());
        conservative_walk(&mut runner, &order)
    })();
    runner.finish(result)
}
