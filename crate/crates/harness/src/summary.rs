//! Paired averaging over trials.
//!
//! At each sweep point the mean is taken over the trials in which every
//! algorithm returned an optimal solution, so all curves average the same
//! networks. Infeasible and failed trials are counted per algorithm.

use std::collections::{BTreeMap, BTreeSet};

use gsbf_core::{Algorithm, SolveStatus};

use crate::sweep::{ResultRecord, SweepKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_hash: String,
    pub sweep_var: SweepKind,
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    /// Trials in which every algorithm was optimal; the means run over these.
    pub common_feasible: usize,
    pub infeasible: usize,
    pub failed: usize,
    pub mean_network_power: Option<f64>,
    pub mean_transmit_power: Option<f64>,
    pub mean_num_active: Option<f64>,
    pub mean_socp_count: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One row per (sweep point, algorithm), in point then algorithm order. The
/// result does not depend on the order of `records`.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut by_point: BTreeMap<usize, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        by_point.entry(r.point).or_default().push(r);
    }
    let mut rows = Vec::new();
    for recs in by_point.values_mut() {
        recs.sort_by_key(|r| (r.trial, r.algorithm));
        let algorithms: BTreeSet<Algorithm> = recs.iter().map(|r| r.algorithm).collect();
        let trials: BTreeSet<usize> = recs.iter().map(|r| r.trial).collect();
        let common: BTreeSet<usize> = trials
            .iter()
            .copied()
            .filter(|&t| {
                algorithms.iter().all(|&a| {
                    recs.iter().any(|r| r.trial == t && r.algorithm == a && r.status == SolveStatus::Optimal)
                })
            })
            .collect();
        for &a in &algorithms {
            let mine: Vec<&&ResultRecord> = recs.iter().filter(|r| r.algorithm == a).collect();
            let paired = || mine.iter().filter(|r| common.contains(&r.trial));
            let count = |s: SolveStatus| mine.iter().filter(|r| r.status == s).count();
            rows.push(SummaryRow {
                config_hash: mine[0].config_hash.clone(),
                sweep_var: mine[0].sweep_var,
                sweep_value: mine[0].sweep_value,
                algorithm: a,
                trials: mine.len(),
                common_feasible: common.len(),
                infeasible: count(SolveStatus::Infeasible),
                failed: count(SolveStatus::SolverFailure),
                mean_network_power: mean(paired().filter_map(|r| r.network_power)),
                mean_transmit_power: mean(paired().filter_map(|r| r.transmit_power)),
                mean_num_active: mean(paired().filter_map(|r| r.num_active.map(|n| n as f64))),
                mean_socp_count: mean(paired().map(|r| r.socp_count as f64)),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use std::time::Duration;

    use super::*;

    fn rec(trial: usize, algorithm: Algorithm, power: Option<f64>) -> ResultRecord {
        ResultRecord {
            config_hash: "h".into(),
            point: 0,
            trial,
            sub_seed: trial as u64,
            algorithm,
            sweep_var: SweepKind::Sinr,
            sweep_value: 4.0,
            status: if power.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible },
            num_active: power.map(|_| 3),
            transmit_power: power.map(|p| p / 10.0),
            network_power: power,
            socp_count: 1,
            wall_time: Duration::ZERO,
            diagnostic: None,
        }
    }

    #[test]
    fn single_record_mean_is_its_value() {
        let rows = summarize(&[rec(0, Algorithm::Greedy, Some(12.5))]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_network_power, Some(12.5));
        assert_eq!(rows[0].common_feasible, 1);
    }

    #[test]
    fn infeasible_trial_is_excluded_and_counted() {
        let mut records: Vec<_> = (0..9).map(|t| rec(t, Algorithm::Greedy, Some(t as f64))).collect();
        records.push(rec(9, Algorithm::Greedy, None));
        let rows = summarize(&records);
        assert_eq!(rows[0].common_feasible, 9);
        assert_eq!(rows[0].infeasible, 1);
        assert_eq!(rows[0].mean_network_power, Some(4.0));
    }

    #[test]
    fn pairing_uses_trials_feasible_for_all() {
        let records = vec![
            rec(0, Algorithm::Greedy, Some(10.0)),
            rec(0, Algorithm::CoordinatedBeamforming, Some(20.0)),
            rec(1, Algorithm::Greedy, Some(100.0)),
            rec(1, Algorithm::CoordinatedBeamforming, None),
        ];
        let rows = summarize(&records);
        let gs = rows.iter().find(|r| r.algorithm == Algorithm::Greedy).unwrap();
        assert_eq!(gs.mean_network_power, Some(10.0));
        assert_eq!(gs.infeasible, 0);
        let mut shuffled = records.clone();
        shuffled.reverse();
        assert_eq!(summarize(&shuffled), rows);
    }
}
