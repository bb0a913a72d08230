mod common;

use common::{gaussian_channel, random_instance, rel, staircase};
use gsbf_core::conic::{
    solve_power_min, solve_socp, solve_weighted_group_norm, verify_solution, AffineRow, ConeOrigin, ConicProblem,
    SocpSolution,
};
use gsbf_core::model::Beamformer;
use gsbf_core::sdr::{sdr_power_min, SdrSettings};
use gsbf_core::{ChannelState, PowerModel, ProblemData, QosSpec, SolveStatus, SolverSettings};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn settings() -> SolverSettings<f64> {
    SolverSettings::default()
}

fn complex_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

#[test]
fn random_socp_has_small_duality_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.random_range(2..8);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut p = ConicProblem::new(n);
        let mut duals = Vec::new();
        for _ in 0..rng.random_range(1..5) {
            let dim = rng.random_range(2..5);
            let mut rows: Vec<AffineRow<f64>> = (0..dim)
                .map(|_| AffineRow {
                    terms: (0..n).map(|j| (j, rng.random_range(-1.0..1.0))).collect(),
                    constant: rng.random_range(-1.0..1.0),
                })
                .collect();
            // Make x0 strictly feasible by lifting the head row.
            let tail: f64 = rows[1..].iter().map(|r| r.eval(&x0).powi(2)).sum::<f64>().sqrt();
            rows[0].constant += tail + 1.0 - rows[0].eval(&x0);
            // Interior dual point for this block.
            let mut z: Vec<f64> = (1..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let head = z.iter().map(|v| v * v).sum::<f64>().sqrt() + rng.random_range(0.1..1.0);
            z.insert(0, head);
            duals.extend(rows.iter().cloned().zip(z));
            p.add_soc(ConeOrigin::Generic, rows);
        }
        let mut c = vec![0.0; n];
        for (row, z) in &duals {
            for &(j, a) in &row.terms {
                c[j] += a * z;
            }
        }
        p.set_objective(c, 1.0);
        match solve_socp(&p, &settings()) {
            SocpSolution::Optimal { x, z, objective, .. } => {
                let dual: f64 = -p.rows().iter().zip(&z).map(|(r, zi)| r.constant * zi).sum::<f64>();
                assert!((objective - dual).abs() <= 1e-7 * (1.0 + objective.abs()), "gap {objective} vs {dual}");
                assert!(p.max_violation(&x) <= 1e-7);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }
}

#[test]
fn scalar_single_user_closed_form() {
    let ch = ChannelState::from_rows(&[1], vec![vec![Complex64::new(1.0, 0.0)]]).unwrap();
    let qos = QosSpec::new(vec![1.0], vec![1.0]).unwrap();
    let model = PowerModel::new(vec![1.0], vec![100.0], vec![0.0]).unwrap();
    let data = ProblemData::new(&ch, &qos, &model).unwrap();
    let out = solve_power_min(&[0], &data, &settings()).unwrap();
    assert!(rel(out.transmit_power.unwrap(), 1.0) < 1e-7);
    let w = out.beamformer.unwrap();
    let report = verify_solution(&w, &[0], &ch, &qos, &model, 1e-6);
    assert!(report.passed());
    assert!(rel(report.sinr[0], 1.0) < 1e-6, "SINR should be tight: {}", report.sinr[0]);
}

#[test]
fn single_user_multi_rrh_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..30 {
        let l = rng.random_range(1..=3);
        let antennas: Vec<usize> = (0..l).map(|_| rng.random_range(1..=2)).collect();
        let ch = gaussian_channel(seed, &antennas, 1);
        let eta: Vec<f64> = (0..l).map(|_| rng.random_range(0.5..4.0)).collect();
        let model = PowerModel::new(eta.clone(), vec![1e6; l], vec![1.0; l]).unwrap();
        let qos = QosSpec::new(vec![rng.random_range(0.5..4.0)], vec![rng.random_range(0.1..2.0)]).unwrap();
        let data = ProblemData::new(&ch, &qos, &model).unwrap();
        let all: Vec<usize> = (0..l).collect();
        let denom: f64 = (0..l)
            .map(|j| eta[j] * ch.block(0, j).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        let expect = qos.gamma(0) * qos.sigma2(0) / denom;
        let out = solve_power_min(&all, &data, &settings()).unwrap();
        assert!(rel(out.transmit_power.unwrap(), expect) < 1e-6, "seed {seed}");
    }
}

#[test]
fn single_rrh_feasibility_boundary() {
    let ch = ChannelState::from_rows(&[2], vec![vec![Complex64::new(0.3, -0.4), Complex64::new(1.2, 0.5)]]).unwrap();
    let gain: f64 = ch.block(0, 0).iter().map(|z| z.norm_sqr()).sum();
    let sigma2 = 0.5;
    let threshold = 2.0 * gain / sigma2; // P = 2
    for (gamma, feasible) in [(threshold * 0.999, true), (threshold * 1.001, false)] {
        let qos = QosSpec::new(vec![gamma], vec![sigma2]).unwrap();
        let model = PowerModel::new(vec![1.0], vec![2.0], vec![0.0]).unwrap();
        let data = ProblemData::new(&ch, &qos, &model).unwrap();
        let out = solve_power_min(&[0], &data, &settings()).unwrap();
        let expect = if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible };
        assert_eq!(out.status, expect, "gamma = {gamma}");
    }
}

#[test]
fn orthogonal_users_decouple() {
    // Two single-antenna RRHs, each reaching only its own user.
    let ch = ChannelState::from_rows(
        &[1, 1],
        vec![
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
        ],
    )
    .unwrap();
    let qos = QosSpec::new(vec![2.0, 3.0], vec![1.0, 0.5]).unwrap();
    let model = PowerModel::new(vec![1.0, 2.0], vec![10.0, 10.0], vec![1.0, 1.0]).unwrap();
    let data = ProblemData::new(&ch, &qos, &model).unwrap();
    let out = solve_power_min(&[0, 1], &data, &settings()).unwrap();
    let expect = 2.0 * 1.0 / (1.0 * 4.0) + 3.0 * 0.5 / (2.0 * 1.0);
    assert!(rel(out.transmit_power.unwrap(), expect) < 1e-7);
    assert!(rel(out.network_power.unwrap(), expect + 2.0) < 1e-7);
}

#[test]
fn phase_rotation_of_channels_leaves_optimum_unchanged() {
    for seed in 0..5 {
        let inst = random_instance(seed, 4, 3, 2, 500.0, 4.0, staircase(4));
        let base = solve_power_min(&[0, 1, 2, 3], &inst.data(), &settings()).unwrap();
        if !base.is_optimal() {
            continue;
        }
        let mut rotated = inst.channel.clone();
        for k in 0..3 {
            let phase = Complex64::from_polar(1.0, 0.7 + k as f64);
            for l in 0..4 {
                for z in rotated.block_mut(k, l) {
                    *z *= phase;
                }
            }
        }
        let data = ProblemData::new(&rotated, &inst.qos, &inst.model).unwrap();
        let out = solve_power_min(&[0, 1, 2, 3], &data, &settings()).unwrap();
        assert!(rel(out.transmit_power.unwrap(), base.transmit_power.unwrap()) < 1e-8, "seed {seed}: {:?} vs {:?}", out.transmit_power, base.transmit_power);
    }
}

#[test]
fn relabeling_rrhs_leaves_optimum_unchanged() {
    let inst = random_instance(21, 3, 3, 2, 500.0, 2.0, vec![6.0, 7.0, 8.0]);
    let base = solve_power_min(&[0, 1, 2], &inst.data(), &settings()).unwrap();
    assert!(base.is_optimal());
    let perm = [2, 0, 1];
    let rows = (0..3)
        .map(|k| perm.iter().flat_map(|&l| inst.channel.block(k, l).to_vec()).collect())
        .collect();
    let ch = ChannelState::from_rows(&[2, 2, 2], rows).unwrap();
    let model = PowerModel::new(vec![4.0; 3], vec![1.0; 3], perm.iter().map(|&l| inst.model.p_delta(l)).collect()).unwrap();
    let data = ProblemData::new(&ch, &inst.qos, &model).unwrap();
    let out = solve_power_min(&[0, 1, 2], &data, &settings()).unwrap();
    assert!(rel(out.network_power.unwrap(), base.network_power.unwrap()) < 1e-8);
}

#[test]
fn every_optimal_output_verifies_and_subsets_are_monotone() {
    for seed in 0..6 {
        let inst = random_instance(100 + seed, 4, 3, 2, 700.0, 4.0, staircase(4));
        let data = inst.data();
        let mut results = Vec::new();
        for mask in 1u32..16 {
            let set: Vec<usize> = (0..4).filter(|l| mask >> l & 1 == 1).collect();
            let out = solve_power_min(&set, &data, &settings()).unwrap();
            assert_ne!(out.status, SolveStatus::SolverFailure, "seed {seed} set {set:?}");
            if let Some(w) = &out.beamformer {
                let report = verify_solution(w, &set, &inst.channel, &inst.qos, &inst.model, 1e-6);
                assert!(report.passed(), "seed {seed} set {set:?}: {report:?}");
            }
            results.push((mask, out));
        }
        for (m1, o1) in &results {
            for (m2, o2) in &results {
                if m1 & m2 != *m1 {
                    continue;
                }
                // m1 ⊆ m2
                match (o1.transmit_power, o2.transmit_power) {
                    (Some(t1), Some(t2)) => assert!(t1 >= t2 * (1.0 - 1e-6), "T({m1:b}) < T({m2:b})"),
                    (Some(_), None) => panic!("seed {seed}: subset {m1:b} feasible but superset {m2:b} not"),
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn power_min_matches_sdr_oracle() {
    let mut checked = 0;
    for seed in 0..25 {
        let l = 2 + (seed as usize % 3);
        let k = 2 + (seed as usize / 3 % 3);
        let inst = random_instance(500 + seed, l, k, 2, 500.0, 4.0, staircase(l));
        let data = inst.data();
        let all: Vec<usize> = (0..l).collect();
        let socp = solve_power_min(&all, &data, &settings()).unwrap();
        let sdr = sdr_power_min(&all, &data, &SdrSettings::default());
        match (socp.transmit_power, sdr) {
            (Some(t), Ok(s)) => {
                assert!(rel(t, s.transmit_power) < 1e-5, "seed {seed}: {t} vs {}", s.transmit_power);
                assert!(s.rank_ratio < 1e-3);
                checked += 1;
            }
            (None, Err(_)) => {}
            (t, s) => panic!("seed {seed}: SOCP {t:?} and SDR {:?} disagree on feasibility", s.map(|s| s.transmit_power)),
        }
    }
    assert!(checked >= 10);
}

#[test]
fn weighted_problem_single_user_is_tight() {
    let ch = ChannelState::from_rows(&[2], vec![vec![Complex64::new(1.0, 1.0), Complex64::new(0.5, 0.0)]]).unwrap();
    let qos = QosSpec::new(vec![2.0], vec![0.5]).unwrap();
    let model = PowerModel::new(vec![1.0], vec![100.0], vec![3.0]).unwrap();
    let data = ProblemData::new(&ch, &qos, &model).unwrap();
    let out = solve_weighted_group_norm(&[1.5], &data, &settings()).unwrap();
    let w = out.beamformer.unwrap();
    assert!(rel(w.group_power(0), 2.0 * 0.5 / 2.25) < 1e-6);
    assert!(rel(out.objective.unwrap(), 1.5 * (1.0f64 / 2.25).sqrt()) < 1e-6);
}

#[test]
fn weighted_problem_respects_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows: Vec<Vec<Complex64>> = (0..2)
        .map(|_| {
            let half = complex_row(&mut rng, 2);
            half.iter().chain(&half).copied().collect()
        })
        .collect();
    let ch = ChannelState::from_rows(&[2, 2], rows).unwrap();
    let qos = QosSpec::new(vec![1.0, 1.0], vec![0.1, 0.1]).unwrap();
    let model = PowerModel::uniform(2, 1.0, 10.0, 2.0).unwrap();
    let data = ProblemData::new(&ch, &qos, &model).unwrap();
    let out = solve_weighted_group_norm(&[1.0, 1.0], &data, &settings()).unwrap();
    let w = out.beamformer.unwrap();
    assert!((w.group_norm(0) - w.group_norm(1)).abs() < 1e-6);
}

#[test]
fn heavier_weight_shrinks_its_group() {
    let inst = random_instance(31, 3, 2, 2, 400.0, 0.0, vec![6.0, 7.0, 8.0]);
    let data = inst.data();
    let norm0 = |b: f64| {
        let out = solve_weighted_group_norm(&[b, 1.0, 1.0], &data, &settings()).unwrap();
        out.beamformer.unwrap().group_norm(0)
    };
    let (light, heavy) = (norm0(0.5), norm0(4.0));
    assert!(heavy <= light * (1.0 + 1e-6) + 1e-12, "{heavy} > {light}");
}

#[test]
fn contract_errors() {
    let inst = random_instance(1, 2, 1, 1, 300.0, 0.0, vec![1.0, 1.0]);
    let data = inst.data();
    assert!(solve_power_min(&[], &data, &settings()).is_err());
    assert!(solve_power_min(&[0, 0], &data, &settings()).is_err());
    assert!(solve_power_min(&[5], &data, &settings()).is_err());
    assert!(solve_weighted_group_norm(&[0.0, 0.0], &data, &settings()).is_err());
    assert!(solve_weighted_group_norm(&[1.0], &data, &settings()).is_err());
}

#[test]
fn zero_beamformer_fails_every_sinr() {
    let inst = random_instance(2, 2, 3, 2, 300.0, 0.0, vec![1.0, 1.0]);
    let w = Beamformer::<f64>::zeros(&[2, 2], 3);
    let report = verify_solution(&w, &[0, 1], &inst.channel, &inst.qos, &inst.model, 1e-6);
    assert!(report.sinr_ok.iter().all(|ok| !ok));
    assert!(report.power_ok.iter().all(|ok| *ok));
}

#[test]
fn single_precision_pipeline() {
    let ch = ChannelState::<f32>::from_rows(&[1, 1], vec![vec![num_complex::Complex32::new(1.0, 0.0), num_complex::Complex32::new(0.5, 0.5)]]).unwrap();
    let qos = QosSpec::<f32>::new(vec![1.0], vec![1.0]).unwrap();
    let model = PowerModel::<f32>::new(vec![1.0, 1.0], vec![100.0, 100.0], vec![1.0, 1.0]).unwrap();
    let data = ProblemData::new(&ch, &qos, &model).unwrap();
    let out = solve_power_min(&[0, 1], &data, &SolverSettings::default()).unwrap();
    let t = out.transmit_power.expect(&format!("{:?}", out.diagnostic));
    assert!((t - 1.0 / 1.5).abs() < 1e-3, "{t}");
}
