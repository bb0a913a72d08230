//! Invariant suites behind `gsbf validate`.
//!
//! Each suite runs on the base point of a config and reports one [`Check`].

use std::fmt;

use anyhow::Result;
use gsbf_core::conic::verify_solution;
use gsbf_core::model::support_transport_power;
use gsbf_core::sparsity::{aligned_dual, homogeneous_lower_bound, omega, omega_dual, pairing};
use gsbf_core::{run, Algorithm, AlgorithmRun, Beamformer, PowerModel, ProblemData};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::snapshot::Snapshot;
use crate::summary::summarize;
use crate::sweep::{run_trial, Plan, ResultRecord};

/// Slack for power comparisons between algorithms.
pub const ORDER_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<24} {}", self.name, self.detail)
    }
}

/// Upper bound on the SOCP count of one run over `num_rrh` RRHs.
pub fn socp_bound(algorithm: Algorithm, num_rrh: usize) -> usize {
    let l = num_rrh;
    match algorithm {
        Algorithm::CoordinatedBeamforming => 1,
        Algorithm::Exhaustive => (1 << l) - 1,
        Algorithm::Greedy => 1 + l * (l + 1) / 2,
        Algorithm::BisectionGsbf | Algorithm::SparsityOnly => {
            3 + (l + 1).next_power_of_two().trailing_zeros() as usize
        }
        Algorithm::IterativeGsbf | Algorithm::Rminlp => 2 * l + 2,
    }
}

/// Collects failures of one suite.
struct Tally {
    name: &'static str,
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> Check {
        let detail = match self.failures.first() {
            None => format!("{} cases", self.cases),
            Some(first) => format!("{} of {} cases failed; first: {first}", self.failures.len(), self.cases),
        };
        Check { name: self.name, passed: self.failures.is_empty(), detail }
    }
}

struct TrialRuns {
    trial: usize,
    runs: Vec<(Algorithm, AlgorithmRun<f64>)>,
}

impl TrialRuns {
    fn power(&self, a: Algorithm) -> Option<f64> {
        self.runs.iter().find(|r| r.0 == a).and_then(|r| r.1.outcome.network_power)
    }
}

/// Runs every suite on the base point of `config`. Exhaustive search joins
/// the algorithm list when the network is within the exhaustive cap.
pub fn run_invariants(config: &ExperimentConfig) -> Result<Vec<Check>> {
    let plan = Plan::single(config)?;
    let point = &plan.points[0];
    let l = config.scenario.num_rrh;
    let algorithms: Vec<Algorithm> = Algorithm::ALL
        .into_iter()
        .filter(|&a| a != Algorithm::Exhaustive || l <= config.algorithm.exhaustive_cap)
        .collect();
    let alg_config = config.algorithm_config();

    let mut paired = Tally::new("paired_scenarios");
    let mut snapshot = Tally::new("snapshot_round_trip");
    let mut trials = Vec::new();
    for t in 0..config.trials {
        let inst = plan.instance(point, t)?;
        let again = plan.instance(point, t)?;
        paired.check(inst.channel == again.channel && inst.network == again.network, || {
            format!("trial {t}: regenerated instance differs")
        });
        let snap = Snapshot::capture(&inst.network, &inst.channel, &inst.qos);
        let restored = Snapshot::from_toml(&snap.to_toml())?.restore()?;
        snapshot.check(restored == (inst.network.clone(), inst.channel.clone(), inst.qos.clone()), || {
            format!("trial {t}: restored instance differs")
        });
        let data = ProblemData::new(&inst.channel, &inst.qos, inst.network.power())?;
        let runs = algorithms
            .iter()
            .map(|&a| Ok((a, run(a, &data, &alg_config)?)))
            .collect::<Result<Vec<_>>>()?;
        trials.push((inst, TrialRuns { trial: t, runs }));
    }

    let mut feasibility = Tally::new("solution_feasibility");
    let mut counts = Tally::new("socp_count_bounds");
    let mut sandwich = Tally::new("sandwich_ordering");
    let mut descent = Tally::new("mm_descent");
    for (inst, tr) in &trials {
        let t = tr.trial;
        for (a, r) in &tr.runs {
            let o = &r.outcome;
            if let Some(w) = &o.beamformer {
                let report = verify_solution(w, &o.active_set, &inst.channel, &inst.qos, inst.network.power(), 1e-6);
                feasibility.check(report.passed(), || format!("trial {t} {a}: {report:?}"));
            }
            let bound = socp_bound(*a, l);
            counts.check(o.socp_count <= bound, || format!("trial {t} {a}: {} > {bound}", o.socp_count));
            if *a == Algorithm::IterativeGsbf {
                let f = &r.trace.log_sum_history;
                let ok = f.windows(2).all(|p| p[1] <= p[0] + 1e-6) && f.len() <= l;
                descent.check(ok, || format!("trial {t}: log-sum history {f:?}"));
            }
        }
        let Some(cb) = tr.power(Algorithm::CoordinatedBeamforming) else { continue };
        let floor = tr.power(Algorithm::Exhaustive);
        for a in [Algorithm::Greedy, Algorithm::IterativeGsbf] {
            let Some(p) = tr.power(a) else {
                sandwich.check(false, || format!("trial {t}: {a} not optimal on a feasible instance"));
                continue;
            };
            sandwich.check(p <= cb + ORDER_SLACK, || format!("trial {t}: {a} {p} above cb {cb}"));
            if let Some(best) = floor {
                sandwich.check(best <= p + ORDER_SLACK, || format!("trial {t}: exhaustive {best} above {a} {p}"));
            }
        }
    }

    let mut independence = Tally::new("algorithm_independence");
    let mut permutation = Tally::new("summary_permutation");
    let listed = config.algorithm_list()?;
    if let Some(&first) = listed.first() {
        let full = run_trial(&plan, point, 0)?;
        let mut alone_plan = plan.clone();
        alone_plan.algorithms = vec![first];
        let alone = run_trial(&alone_plan, point, 0)?;
        let same = |x: &ResultRecord, y: &ResultRecord| {
            (x.status, x.network_power, x.num_active, x.socp_count) == (y.status, y.network_power, y.num_active, y.socp_count)
        };
        independence.check(same(&full[0], &alone[0]), || format!("{first} changed when run alone"));
        let mut reversed = full.clone();
        reversed.reverse();
        permutation.check(summarize(&full) == summarize(&reversed), || "summary depends on record order".into());
    }

    let inequalities = inequality_suite(config.master_seed, 1000);

    Ok(vec![
        paired.finish(),
        snapshot.finish(),
        feasibility.finish(),
        counts.finish(),
        sandwich.finish(),
        descent.finish(),
        independence.finish(),
        permutation.finish(),
        inequalities,
    ])
}

/// Lower-bound chain `Ω ≤ p_h ≤ T + F`, the generalized Cauchy–Schwarz
/// inequality and tightness of the aligned dual on `cases` random draws.
pub fn inequality_suite(seed: u64, cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("lower_bound_inequalities");
    for case in 0..cases {
        let l = rng.random_range(1..=5usize);
        let k = rng.random_range(1..=4usize);
        let antennas: Vec<usize> = (0..l).map(|_| rng.random_range(1..=3)).collect();
        let eta: Vec<f64> = (0..l).map(|_| rng.random_range(0.5..5.0)).collect();
        let pc: Vec<f64> = (0..l).map(|_| rng.random_range(0.1..20.0)).collect();
        let model = PowerModel::new(eta, vec![1.0; l], pc).expect("valid random model");
        let w = random_beam(&mut rng, &antennas, k, true);
        let y = random_beam(&mut rng, &antennas, k, false);

        let om = omega(&w, &model).expect("shapes match");
        let ph = homogeneous_lower_bound(&w, &model);
        let total = w.transmit_power(&model) + support_transport_power(&w, &model);
        tally.check(om <= ph * (1.0 + 1e-12) && ph <= total * (1.0 + 1e-12), || {
            format!("case {case}: Ω {om}, p_h {ph}, T+F {total}")
        });
        let lhs = pairing(&w, &y).expect("shapes match");
        let rhs = om * omega_dual(&y, &model).expect("positive transport power");
        tally.check(lhs <= rhs * (1.0 + 1e-12) + 1e-300, || format!("case {case}: pairing {lhs} > {rhs}"));
        let aligned = aligned_dual(&w, &model);
        let attained = pairing(&w, &aligned).expect("shapes match");
        let dual = omega_dual(&aligned, &model).expect("positive transport power");
        let tight = (attained - om).abs() <= 1e-9 * om.max(f64::MIN_POSITIVE) && (om == 0.0 || (dual - 1.0).abs() <= 1e-9);
        tally.check(tight, || format!("case {case}: aligned pairing {attained} vs Ω {om}, Ω* {dual}"));
    }
    tally.finish()
}

fn random_beam(rng: &mut ChaCha8Rng, antennas: &[usize], users: usize, sparse: bool) -> Beamformer<f64> {
    let total = antennas.iter().sum::<usize>() * users;
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let coeffs = (0..total)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
        .collect();
    let mut w = Beamformer::from_coeffs(antennas, users, coeffs).expect("consistent shape");
    if sparse {
        for l in 0..antennas.len() {
            if rng.random_bool(0.3) {
                w.group_mut(l).fill(Complex64::new(0.0, 0.0));
            }
        }
    }
    w
}

/// True when every check passed.
pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
