mod common;

use common::{gaussian_channel, random_instance, rel, staircase, Instance};
use gsbf_core::algorithms::{
    bisection_gsbf, exhaustive_search, greedy_selection, is_monotone, rminlp_deflation, scan_prefix_feasibility,
    sp_baseline, StepKind,
};
use gsbf_core::conic::{solve_rminlp_relaxation, verify_solution};
use gsbf_core::sparsity::{ordering_scores, sp_ordering_scores};
use gsbf_core::{run, Algorithm, AlgorithmConfig, ChannelState, Error, PowerModel, ProblemData, QosSpec, SolveStatus};
use num_complex::Complex64;

fn config() -> AlgorithmConfig<f64> {
    AlgorithmConfig::default()
}

/// One user, two 2-antenna RRHs; RRH 1 has a 100 W transport cost and RRH 0 alone suffices.
fn expensive_second_rrh() -> Instance {
    Instance {
        channel: gaussian_channel(7, &[2, 2], 1),
        qos: QosSpec::new(vec![1.0], vec![0.1]).unwrap(),
        model: PowerModel::new(vec![4.0, 4.0], vec![1.0, 1.0], vec![5.0, 100.0]).unwrap(),
    }
}

#[test]
fn expensive_transport_link_is_switched_off() {
    let inst = expensive_second_rrh();
    let data = inst.data();
    let ex = exhaustive_search(&data, &config()).unwrap();
    assert_eq!(ex.outcome.socp_count, 3);
    assert_eq!(ex.outcome.active_set, vec![0]);
    assert_eq!(ex.trace.switched_off, vec![1]);

    let gs = greedy_selection(&data, &config()).unwrap();
    assert_eq!(gs.outcome.active_set, vec![0]);
    assert!(rel(gs.outcome.network_power.unwrap(), ex.outcome.network_power.unwrap()) < 1e-9);

    let relaxed = solve_rminlp_relaxation(&data, &config().solver);
    let z = relaxed.activity.unwrap();
    assert!(z[1] < z[0], "activities {z:?}");
    let rm = rminlp_deflation(&data, &config()).unwrap();
    assert_eq!(rm.trace.order.as_deref(), Some(&[1, 0][..]));
    assert_eq!(rm.outcome.active_set, vec![0]);
}

#[test]
fn relaxed_activity_equals_power_fraction() {
    let inst = random_instance(4, 4, 3, 2, 500.0, 2.0, staircase(4));
    let data = inst.data();
    let relaxed = solve_rminlp_relaxation(&data, &config().solver);
    let w = relaxed.solve.beamformer.unwrap();
    for (l, z) in relaxed.activity.unwrap().iter().enumerate() {
        let frac = w.group_power(l) / inst.model.p_max(l);
        assert!((z - frac).abs() < 1e-6, "RRH {l}: z = {z}, power fraction {frac}");
    }
}

#[test]
fn single_rrh_every_algorithm_is_coordinated_beamforming() {
    let inst = random_instance(2, 1, 2, 2, 200.0, 0.0, vec![7.0]);
    let data = inst.data();
    let cb = run(Algorithm::CoordinatedBeamforming, &data, &config()).unwrap().outcome;
    assert!(cb.is_optimal());
    assert!(rel(cb.network_power.unwrap(), cb.transmit_power.unwrap() + 7.0) < 1e-12);
    for a in Algorithm::ALL {
        let out = run(a, &data, &config()).unwrap().outcome;
        assert_eq!(out.active_set, vec![0], "{a}");
        assert!(rel(out.network_power.unwrap(), cb.network_power.unwrap()) < 1e-9, "{a}");
    }
    assert!(bisection_gsbf(&data, &config()).unwrap().outcome.socp_count <= 3);
}

#[test]
fn sandwich_bounds_and_verification() {
    for seed in 0..8 {
        let inst = random_instance(40 + seed, 5, 3, 2, 800.0, 4.0, staircase(5));
        let data = inst.data();
        let runs: Vec<_> = Algorithm::ALL.iter().map(|&a| (a, run(a, &data, &config()).unwrap())).collect();
        let power = |a: Algorithm| runs.iter().find(|r| r.0 == a).unwrap().1.outcome.network_power;
        let feasible = power(Algorithm::CoordinatedBeamforming).is_some();
        let l: usize = 5;
        for (a, r) in &runs {
            let o = &r.outcome;
            assert_eq!(o.is_optimal(), feasible, "seed {seed} {a}: feasibility disagrees");
            assert_ne!(o.status, SolveStatus::SolverFailure);
            let counts: Vec<usize> = r.trace.steps.iter().map(|s| s.socp_count).collect();
            assert!(counts.windows(2).all(|p| p[0] < p[1]));
            assert_eq!(counts.last().copied().unwrap_or(0), o.socp_count);
            let mut off = r.trace.switched_off.clone();
            off.sort_unstable();
            off.dedup();
            assert_eq!(off.len(), r.trace.switched_off.len());
            let bound = match a {
                Algorithm::Greedy => 1 + l * (l + 1) / 2,
                Algorithm::BisectionGsbf | Algorithm::SparsityOnly => 3 + (l + 1).next_power_of_two().trailing_zeros() as usize,
                Algorithm::IterativeGsbf | Algorithm::Rminlp => 2 * l + 2,
                Algorithm::CoordinatedBeamforming => 1,
                Algorithm::Exhaustive => (1 << l) - 1,
            };
            assert!(o.socp_count <= bound, "seed {seed} {a}: {} SOCPs", o.socp_count);
            if let Some(w) = &o.beamformer {
                let report = verify_solution(w, &o.active_set, &inst.channel, &inst.qos, &inst.model, 1e-6);
                assert!(report.passed(), "seed {seed} {a}: {report:?}");
                let mut support = w.active_groups();
                support.retain(|g| !o.active_set.contains(g));
                assert!(support.is_empty());
            }
        }
        if !feasible {
            continue;
        }
        let best = power(Algorithm::Exhaustive).unwrap();
        let cb = power(Algorithm::CoordinatedBeamforming).unwrap();
        for (a, r) in &runs {
            assert!(best <= r.outcome.network_power.unwrap() + 1e-8, "seed {seed}: {a} beats exhaustive");
        }
        for a in [Algorithm::Greedy, Algorithm::IterativeGsbf, Algorithm::Rminlp] {
            assert!(power(a).unwrap() <= cb + 1e-8, "seed {seed}: {a} above CB");
        }
    }
}

#[test]
fn bisection_agrees_with_linear_scan() {
    let mut monotone = 0;
    for seed in 0..20 {
        let inst = random_instance(900 + seed, 6, 4, 2, 1000.0, 4.0, staircase(6));
        let data = inst.data();
        let run = bisection_gsbf(&data, &config()).unwrap();
        let Some(order) = run.trace.order.clone() else { continue };
        let flags = scan_prefix_feasibility(&order, &data, &config().solver).unwrap().unwrap();
        assert_eq!(flags[0], run.outcome.is_optimal());
        if !is_monotone(&flags) {
            continue;
        }
        monotone += 1;
        let j0 = flags.iter().take_while(|&&f| f).count().saturating_sub(1);
        assert_eq!(run.trace.switched_off, order[..j0].to_vec(), "seed {seed}");
    }
    assert!(monotone >= 15, "only {monotone} of 20 prefix sequences were monotone");
}

#[test]
fn reweighting_descends() {
    for seed in 0..6 {
        let inst = random_instance(60 + seed, 5, 3, 2, 800.0, 2.0, staircase(5));
        let data = inst.data();
        let run = run(Algorithm::IterativeGsbf, &data, &config()).unwrap();
        let f = &run.trace.log_sum_history;
        assert!(f.len() <= 5);
        assert!(f.windows(2).all(|p| p[1] <= p[0] + 1e-6), "seed {seed}: {f:?}");
        let weighted = run.trace.steps.iter().filter(|s| s.kind == StepKind::Weighted).count();
        assert_eq!(weighted, f.len());
    }
}

#[test]
fn sparsity_only_matches_bisection_on_homogeneous_instance() {
    // Users see the two RRHs with swapped gains, so κ_1 = κ_2.
    let a = [Complex64::new(1.0, 0.2), Complex64::new(-0.3, 0.5)];
    let b = [Complex64::new(0.4, -0.1), Complex64::new(0.2, 0.3)];
    let rows = vec![[a, b].concat(), [b, a].concat()];
    let ch = ChannelState::from_rows(&[2, 2], rows).unwrap();
    let qos = QosSpec::new(vec![1.0, 2.0], vec![0.05, 0.05]).unwrap();
    let model = PowerModel::uniform(2, 4.0, 5.0, 6.0).unwrap();
    let data = ProblemData::new(&ch, &qos, &model).unwrap();
    let bi = bisection_gsbf(&data, &config()).unwrap();
    let sp = sp_baseline(&data, &config()).unwrap();
    assert_eq!(bi.trace.order, sp.trace.order);
    assert_eq!(bi.outcome.active_set, sp.outcome.active_set);
    assert!(rel(bi.outcome.network_power.unwrap(), sp.outcome.network_power.unwrap()) < 1e-7);
}

#[test]
fn weighted_and_sparsity_orders_differ_with_heterogeneous_costs() {
    let coeffs = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
    let w = gsbf_core::Beamformer::from_coeffs(&[1, 1], 1, coeffs).unwrap();
    let ch = ChannelState::from_rows(&[1, 1], vec![vec![Complex64::new(1.0, 0.0); 2]]).unwrap();
    let model = PowerModel::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 100.0]).unwrap();
    assert_eq!(sp_ordering_scores(&w).order, vec![0, 1]);
    assert_eq!(ordering_scores(&w, &ch, &model).order, vec![1, 0]);
}

#[test]
fn runs_are_reproducible() {
    let inst = random_instance(77, 5, 3, 2, 800.0, 4.0, staircase(5));
    let data = inst.data();
    for a in Algorithm::ALL {
        let x = run(a, &data, &config()).unwrap();
        let y = run(a, &data, &config()).unwrap();
        assert_eq!(x.trace, y.trace, "{a}");
        assert_eq!(x.outcome.beamformer, y.outcome.beamformer, "{a}");
    }
}

#[test]
fn infeasible_instance_is_infeasible_everywhere() {
    let inst = random_instance(5, 3, 3, 2, 1000.0, 40.0, staircase(3));
    let data = inst.data();
    for a in Algorithm::ALL {
        let out = run(a, &data, &config()).unwrap().outcome;
        assert_eq!(out.status, SolveStatus::Infeasible, "{a}");
        assert!(out.network_power.is_none() && out.beamformer.is_none());
    }
}

#[test]
fn solver_failure_is_not_infeasibility() {
    let inst = random_instance(8, 3, 2, 2, 500.0, 0.0, staircase(3));
    let data = inst.data();
    let mut cfg = config();
    cfg.solver.max_iter = 1;
    for a in Algorithm::ALL {
        let out = run(a, &data, &cfg).unwrap().outcome;
        assert_eq!(out.status, SolveStatus::SolverFailure, "{a}");
        assert!(out.diagnostic.is_some());
    }
}

#[test]
fn exhaustive_refuses_large_networks() {
    let inst = random_instance(1, 4, 1, 1, 500.0, 0.0, staircase(4));
    let cfg = AlgorithmConfig { exhaustive_cap: 3, ..config() };
    match exhaustive_search(&inst.data(), &cfg) {
        Err(Error::ExhaustiveCap { num_rrh: 4, cap: 3 }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn algorithm_names_round_trip() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
    }
    assert!("mystery".parse::<Algorithm>().is_err());
}
