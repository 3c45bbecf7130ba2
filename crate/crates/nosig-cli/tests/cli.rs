//! Exit-code contract, scenario validation and output round trips,
//! exercised through the real binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nosig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let out = dir.join("out");
    let mut args = vec![
        cmd.to_string(),
        "--config".into(),
        config.to_string_lossy().into_owned(),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(env!("CARGO_BIN_EXE_nosig"))
        .args(&args)
        .output()
        .expect("binary runs")
}

#[test]
fn exit_zero_on_consistent_audit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), "audit", &scenario("unitary_audit.toml"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_one_on_config_trouble() {
    let tmp = tempfile::tempdir().unwrap();

    let missing = tmp.path().join("nope.toml");
    let out = run_in(tmp.path(), "audit", &missing, &[]);
    assert_eq!(out.status.code(), Some(1));

    // unknown keys are rejected
    let bad = tmp.path().join("bad.toml");
    std::fs::write(
        &bad,
        "hilbert_dim = 2\nseed = 1\nunknown_key = true\n",
    )
    .unwrap();
    let out = run_in(tmp.path(), "audit", &bad, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown"));

    // an ensemble that violates the total-weight invariant
    let overweight = tmp.path().join("overweight.toml");
    std::fs::write(
        &overweight,
        r#"
hilbert_dim = 2
seed = 1
[[ensembles]]
states = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
[[ensembles]]
states = [[[1.0, 0.0], [0.0, 0.0]]]
"#,
    )
    .unwrap();
    let out = run_in(tmp.path(), "purify", &overweight, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_two_on_inequivalent_purify() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("inequivalent.toml");
    std::fs::write(
        &config,
        r#"
hilbert_dim = 2
seed = 1
[[ensembles]]
states = [[[1.0, 0.0], [0.0, 0.0]]]
[[ensembles]]
states = [[[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]]
"#,
    )
    .unwrap();
    let out = run_in(tmp.path(), "purify", &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("trace distance"), "stderr: {stderr}");
}

#[test]
fn exit_three_on_signaling() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), "audit", &scenario("table_map_audit.toml"), &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        "audit",
        &scenario("unitary_audit.toml"),
        &["--seed", "99"],
    );
    assert_eq!(out.status.code(), Some(0));
    let summary = std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 99"));
}

#[test]
fn evolve_output_round_trips_as_input() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = run(&[
        "evolve",
        "--config",
        scenario("weight_conservation.toml").to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let fragment = std::fs::read_to_string(first.join("evolved_t0.toml")).unwrap();

    // feed the evolved ensemble back through an identity evolution; the
    // fragment it emits must be byte-identical
    let mut round = fragment.clone();
    round.push_str(
        "\n[evolution]\nkind = \"unitary\"\nhamiltonian = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]\n",
    );
    let rt_config = tmp.path().join("roundtrip.toml");
    std::fs::write(&rt_config, round).unwrap();
    let second = tmp.path().join("second");
    let out = run(&[
        "evolve",
        "--config",
        rt_config.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reserialized = std::fs::read_to_string(second.join("evolved_t0.toml")).unwrap();
    assert_eq!(fragment, reserialized);
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("jump.toml");
    std::fs::write(
        &config,
        r#"
hilbert_dim = 2
seed = 12
times = [0.5]
[density]
matrix = [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]]
[evolution]
kind = "jump"
hamiltonian = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
ops = [[[[0.7071067811865476, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.7071067811865476, 0.0]]]]
dt = 0.01
trajectories = 256
"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = tmp.path().join(format!("threads_{threads}"));
        let out = Command::new(env!("CARGO_BIN_EXE_nosig"))
            .args([
                "unravel-check",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .env("NOSIG_THREADS", threads)
            .output()
            .expect("binary runs");
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(out_dir.join("unravel.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn dephasing_scenario_reports_the_analytic_off_diagonal() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        "evolve",
        &scenario("lindblad_dephasing_evolve.toml"),
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("out/density_t0.csv")).unwrap();
    let line = csv
        .lines()
        .find(|l| l.starts_with("0,1,"))
        .expect("off-diagonal row");
    let re: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!((re - 0.18393972058572117).abs() < 1e-6);
}

#[test]
fn weinberg_scenario_reports_the_closed_form_distance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), "audit", &scenario("weinberg_audit.toml"), &[]);
    assert_eq!(out.status.code(), Some(3));
    let summary = std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&summary).unwrap();
    let d = value["max_trace_distance"].as_f64().unwrap();
    assert!((d - 0.34922799931830417).abs() < 1e-3);
}
