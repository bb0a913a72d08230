//! End-to-end RRH selection and beamforming algorithms.
//!
//! Every algorithm takes the same [`ProblemData`] and returns a
//! [`SolveOutcome`] together with an [`AlgorithmTrace`] of the SOCPs it solved.
//! A solver failure anywhere aborts the run with a `SolverFailure` outcome; it is
//! never mistaken for infeasibility.

mod bisection;
mod exhaustive;
mod greedy;
mod iterative;
mod rminlp;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::conic::{solve_power_min, solve_weighted_group_norm, BeamSolve, ProblemData, SolverSettings};
use crate::error::{Error, Result};
use crate::model::{SolveOutcome, SolveStatus};
use crate::scalar::{lit, Real};
use crate::sparsity::GroupWeights;

pub use bisection::{bisection_gsbf, is_monotone, scan_prefix_feasibility, sp_baseline};
pub use exhaustive::exhaustive_search;
pub use greedy::greedy_selection;
pub use iterative::iterative_gsbf;
pub use rminlp::rminlp_deflation;

/// The implemented algorithms, in canonical reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// All RRHs on; transmit power minimized.
    CoordinatedBeamforming,
    /// Every nonempty RRH subset.
    Exhaustive,
    /// Greedy one-at-a-time switch-off.
    Greedy,
    /// Weighted group-sparse solve, then a binary search over the induced order.
    BisectionGsbf,
    /// Reweighted group-sparse solves, then a conservative walk over the order.
    IterativeGsbf,
    /// Like bisection GSBF with unit weights and a sparsity-only order.
    SparsityOnly,
    /// Relaxed mixed-integer problem, then a conservative walk.
    Rminlp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::CoordinatedBeamforming,
        Algorithm::Exhaustive,
        Algorithm::Greedy,
        Algorithm::BisectionGsbf,
        Algorithm::IterativeGsbf,
        Algorithm::SparsityOnly,
        Algorithm::Rminlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CoordinatedBeamforming => "cb",
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Greedy => "gs",
            Algorithm::BisectionGsbf => "bisection_gsbf",
            Algorithm::IterativeGsbf => "iterative_gsbf",
            Algorithm::SparsityOnly => "sp",
            Algorithm::Rminlp => "rminlp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::Domain(format!("unknown algorithm {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Knobs shared by the algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig<T> {
    pub solver: SolverSettings<T>,
    /// Largest `L` exhaustive search accepts.
    pub exhaustive_cap: usize,
    /// Relative change of the log-sum objective that ends the reweighting loop.
    pub reweight_tol: T,
    /// Cap on weighted solves in the reweighting loop; `None` means `L`.
    pub max_reweight: Option<usize>,
    /// `ε = max(epsilon_floor, epsilon_rel * max_l ||w̃_l||)` from the first weighted solve.
    pub epsilon_rel: T,
    pub epsilon_floor: T,
}

impl<T: Real> Default for AlgorithmConfig<T> {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            exhaustive_cap: 12,
            reweight_tol: lit(1e-4),
            max_reweight: None,
            epsilon_rel: lit(1e-2),
            epsilon_floor: lit(1e-10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// P(A) for the candidate set.
    PowerMin,
    /// Weighted group-norm problem.
    Weighted,
    /// Relaxed mixed-integer problem.
    Relaxation,
}

/// One SOCP solved during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    pub step: usize,
    pub kind: StepKind,
    /// RRHs present in the problem, ascending.
    pub candidate: Vec<usize>,
    /// RRH whose removal produced this candidate, when meaningful.
    pub removed: Option<usize>,
    pub status: SolveStatus,
    /// Network power for `PowerMin`, objective value otherwise.
    pub value: Option<T>,
    /// SOCPs solved so far, this one included.
    pub socp_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgorithmTrace<T> {
    pub steps: Vec<TraceStep<T>>,
    /// RRHs switched off in the returned solution, in switch-off order.
    pub switched_off: Vec<usize>,
    /// Switch-off order computed by the ordering-based algorithms.
    pub order: Option<Vec<usize>>,
    /// Log-sum objective after each weighted solve (iterative GSBF).
    pub log_sum_history: Vec<T>,
    /// Smoothing parameter used by the reweighting loop.
    pub epsilon: Option<T>,
}

/// Outcome and trace of one algorithm run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun<T> {
    pub outcome: SolveOutcome<T>,
    pub trace: AlgorithmTrace<T>,
}

/// Why a run stopped early.
pub(crate) enum Halt {
    Error(Error),
    Failure(String),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Error(e)
    }
}

pub(crate) type Flow<T> = std::result::Result<T, Halt>;

/// Bookkeeping shared by the algorithm implementations.
pub(crate) struct Runner<'a, 'd, T> {
    pub data: &'a ProblemData<'d, T>,
    pub config: &'a AlgorithmConfig<T>,
    pub trace: AlgorithmTrace<T>,
    count: usize,
    start: Instant,
}

impl<'a, 'd, T: Real> Runner<'a, 'd, T> {
    pub fn new(data: &'a ProblemData<'d, T>, config: &'a AlgorithmConfig<T>) -> Self {
        Self { data, config, trace: AlgorithmTrace::default(), count: 0, start: Instant::now() }
    }

    pub fn num_rrh(&self) -> usize {
        self.data.num_rrh()
    }

    fn push(&mut self, kind: StepKind, candidate: Vec<usize>, removed: Option<usize>, status: SolveStatus, value: Option<T>) {
        self.trace.steps.push(TraceStep {
            step: self.trace.steps.len(),
            kind,
            candidate,
            removed,
            status,
            value,
            socp_count: self.count,
        });
    }

    /// Solves P(A); infeasible outcomes are returned, failures halt the run.
    pub fn power_min(&mut self, set: &[usize], removed: Option<usize>) -> Flow<SolveOutcome<T>> {
        let out = solve_power_min(set, self.data, &self.config.solver)?;
        self.count += 1;
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        self.push(StepKind::PowerMin, sorted, removed, out.status, out.network_power);
        match out.status {
            SolveStatus::SolverFailure => Err(Halt::Failure(out.diagnostic.unwrap_or_default())),
            _ => Ok(out),
        }
    }

    pub fn weighted(&mut self, weights: &GroupWeights<T>) -> Flow<BeamSolve<T>> {
        let out = solve_weighted_group_norm(weights.values(), self.data, &self.config.solver)?;
        self.count += 1;
        self.push(StepKind::Weighted, self.data.all_rrhs(), None, out.status, out.objective);
        match out.status {
            SolveStatus::SolverFailure => Err(Halt::Failure(format!(
                "weighted group-norm problem: {}",
                out.diagnostic.clone().unwrap_or_default()
            ))),
            _ => Ok(out),
        }
    }

    pub fn record_relaxation(&mut self, status: SolveStatus, value: Option<T>) {
        self.count += 1;
        self.push(StepKind::Relaxation, self.data.all_rrhs(), None, status, value);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Final packaging: stamps the total SOCP count and wall time.
    pub fn finish(self, result: Flow<SolveOutcome<T>>) -> Result<AlgorithmRun<T>> {
        let count = self.count;
        let mut outcome = match result {
            Ok(o) => o,
            Err(Halt::Failure(reason)) => SolveOutcome::failure(count, reason),
            Err(Halt::Error(e)) => return Err(e),
        };
        outcome.socp_count = count;
        outcome.wall_time = self.start.elapsed();
        Ok(AlgorithmRun { outcome, trace: self.trace })
    }
}

/// Index of the smallest network power, earliest on ties.
pub(crate) fn best_stage<T: Real>(stages: &[SolveOutcome<T>]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, s) in stages.iter().enumerate() {
        if let Some(p) = s.network_power {
            if best.is_none_or(|(_, b)| p < b) {
                best = Some((i, p));
            }
        }
    }
    best.map(|b| b.0)
}

/// `all \ removed`, ascending.
pub(crate) fn complement(num_rrh: usize, removed: &[usize]) -> Vec<usize> {
    (0..num_rrh).filter(|l| !removed.contains(l)).collect()
}

/// Solves P(L) with every RRH switched on.
pub fn coordinated_beamforming<T: Real>(data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    let mut runner = Runner::new(data, config);
    let all = data.all_rrhs();
    let result = runner.power_min(&all, None);
    runner.finish(result)
}

/// Conservative walk over a switch-off order: solve `P(L \ order[..i])` for
/// `i = 0, 1, ...` until the first infeasible (or empty) set, then return the
/// cheapest visited stage.
pub(crate) fn conservative_walk<T: Real>(runner: &mut Runner<'_, '_, T>, order: &[usize]) -> Flow<SolveOutcome<T>> {
    let num_rrh = runner.num_rrh();
    let mut stages = Vec::new();
    for i in 0..num_rrh {
        let set = complement(num_rrh, &order[..i]);
        let out = runner.power_min(&set, i.checked_sub(1).map(|j| order[j]))?;
        if !out.is_optimal() {
            break;
        }
        stages.push(out);
    }
    match best_stage(&stages) {
        Some(j) => {
            runner.trace.switched_off = order[..j].to_vec();
            Ok(stages.swap_remove(j))
        }
        None => Ok(SolveOutcome::infeasible(runner.count())),
    }
}

/// Runs `algorithm` on one instance.
pub fn run<T: Real>(algorithm: Algorithm, data: &ProblemData<'_, T>, config: &AlgorithmConfig<T>) -> Result<AlgorithmRun<T>> {
    match algorithm {
        Algorithm::CoordinatedBeamforming => coordinated_beamforming(data, config),
        Algorithm::Exhaustive => exhaustive_search(data, config),
        Algorithm::Greedy => greedy_selection(data, config),
        Algorithm::BisectionGsbf => bisection_gsbf(data, config),
        Algorithm::IterativeGsbf => iterative_gsbf(data, config),
        Algorithm::SparsityOnly => sp_baseline(data, config),
        Algorithm::Rminlp => rminlp_deflation(data, config),
    }
}
