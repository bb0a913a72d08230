use std::path::Path;

use gsbf_core::{Algorithm, SolveStatus};
use gsbf_harness::output::{emit_results, write_raw, RAW_HEADER};
use gsbf_harness::snapshot::Snapshot;
use gsbf_harness::summary::summarize;
use gsbf_harness::sweep::{run_sweep, Plan, SweepKind};
use gsbf_harness::validate::{all_passed, run_invariants};
use gsbf_harness::{ExperimentConfig, Overrides};

fn preset(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn small(algorithms: &[&str]) -> ExperimentConfig {
    preset("validate.toml")
        .apply(&Overrides {
            trials: Some(2),
            algorithms: Some(algorithms.iter().map(|s| s.to_string()).collect()),
            ..Default::default()
        })
        .unwrap()
}

fn raw_bytes(config: &ExperimentConfig, kind: SweepKind) -> Vec<u8> {
    let records = run_sweep(&Plan::new(config, kind).unwrap()).unwrap();
    let mut out = Vec::new();
    write_raw(&records, false, &mut out).unwrap();
    out
}

#[test]
fn presets_parse() {
    for name in ["fig3.toml", "fig4.toml", "fig5.toml", "validate.toml"] {
        let c = preset(name);
        assert!(c.trials >= 1, "{name}");
    }
    let fig3 = preset("fig3.toml");
    assert_eq!(fig3.power.p_delta_w.expand(10).unwrap(), (1..=10).map(|l| 5.0 + l as f64).collect::<Vec<_>>());
}

#[test]
fn rerun_is_byte_identical() {
    let c = small(&["cb", "gs", "bisection_gsbf"]);
    assert_eq!(raw_bytes(&c, SweepKind::Sinr), raw_bytes(&c, SweepKind::Sinr));
}

#[test]
fn raw_csv_layout() {
    let c = small(&["cb", "sp"]);
    let text = String::from_utf8(raw_bytes(&c, SweepKind::Sinr)).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), RAW_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    for row in &rows {
        assert_eq!(row.len(), 12);
        assert!(["optimal", "infeasible", "failure"].contains(&&row[6]));
        assert_eq!(row[6] == *"optimal", !row[9].is_empty());
        assert!(row[11].is_empty());
        if !row[9].is_empty() {
            let mantissa = row[9].split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 9, "{}", &row[9]);
        }
    }
}

#[test]
fn adding_an_algorithm_leaves_others_unchanged() {
    let plan = |algs: &[&str]| Plan::new(&small(algs), SweepKind::Sinr).unwrap();
    let few = run_sweep(&plan(&["gs"])).unwrap();
    let many = run_sweep(&plan(&["cb", "gs", "iterative_gsbf"])).unwrap();
    let gs: Vec<_> = many.iter().filter(|r| r.algorithm == Algorithm::Greedy).collect();
    assert_eq!(gs.len(), few.len());
    for (a, b) in few.iter().zip(gs) {
        assert_eq!((a.trial, a.sub_seed, a.status, a.network_power), (b.trial, b.sub_seed, b.status, b.network_power));
    }
}

#[test]
fn trials_share_networks_across_sweep_points() {
    let c = small(&["cb"]);
    let sinr = Plan::new(&c, SweepKind::Sinr).unwrap();
    let a = sinr.instance(&sinr.points[0], 1).unwrap();
    let b = sinr.instance(&sinr.points[1], 1).unwrap();
    assert_eq!(a.channel, b.channel);
    assert_ne!(a.qos, b.qos);

    let mut c = c;
    c.sweep.users = vec![2, 4];
    let users = Plan::new(&c, SweepKind::Users).unwrap();
    let a = users.instance(&users.points[0], 0).unwrap();
    let b = users.instance(&users.points[1], 0).unwrap();
    assert_eq!(a.network.rrh_positions(), b.network.rrh_positions());
    assert_eq!(b.channel.num_users(), 4);
}

#[test]
fn emitted_files_and_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit_results(&[], &[], &dir.path().join("nested"), false).unwrap();
    let raw = std::fs::read_to_string(files.raw).unwrap();
    assert_eq!(raw.lines().count(), 1);
    let summary = std::fs::read_to_string(files.summary).unwrap();
    assert_eq!(summary.lines().count(), 1);

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let err = emit_results(&[], &[], &blocker.join("sub"), false).unwrap_err();
    assert!(format!("{err:#}").contains("file"), "{err:#}");
}

#[test]
fn summary_orders_paired_means() {
    let c = small(&["cb", "exhaustive", "gs"]);
    let records = run_sweep(&Plan::new(&c, SweepKind::Sinr).unwrap()).unwrap();
    assert!(records.iter().all(|r| r.status != SolveStatus::SolverFailure));
    let rows = summarize(&records);
    for point in rows.chunks(3) {
        let mean = |a: Algorithm| point.iter().find(|r| r.algorithm == a).unwrap().mean_network_power;
        if let (Some(ex), Some(gs), Some(cb)) = (mean(Algorithm::Exhaustive), mean(Algorithm::Greedy), mean(Algorithm::CoordinatedBeamforming)) {
            assert!(ex <= gs + 1e-8 && gs <= cb + 1e-8, "{ex} {gs} {cb}");
        }
    }
}

#[test]
fn snapshot_file_round_trip() {
    let c = small(&["cb"]);
    let plan = Plan::single(&c).unwrap();
    let inst = plan.instance(&plan.points[0], 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.toml");
    Snapshot::capture(&inst.network, &inst.channel, &inst.qos).save(&path).unwrap();
    let (network, channel, qos) = Snapshot::load(&path).unwrap().restore().unwrap();
    assert_eq!(network, inst.network);
    assert_eq!(channel, inst.channel);
    assert_eq!(qos, inst.qos);

    let text = std::fs::read_to_string(&path).unwrap().replace("schema_version = 1", "schema_version = 1\nextra = 2");
    assert!(Snapshot::from_toml(&text).is_err());
}

#[test]
fn invariant_suites_pass_on_default_config() {
    let checks = run_invariants(&preset("validate.toml")).unwrap();
    assert!(all_passed(&checks), "{checks:#?}");
}
