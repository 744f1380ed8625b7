use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn monoquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoquad"))
        .args(args)
        .env_remove("MONOQUAD_JOBS")
        .output()
        .expect("run monoquad")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn ratios_match_golden_file() {
    let out = monoquad(&["ratios", "--n-max", "10"]);
    assert!(out.status.success());
    let golden = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/ratios_10.csv")).unwrap();
    assert_eq!(out.stdout, golden);
}

#[test]
fn ratios_rows_carry_discussion_values() {
    let out = monoquad(&["ratios", "--n-max", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[1][7], "2.666666666667");
    assert_eq!(rows[3][9], "1.777777777778");
}

#[test]
fn worst_case_outputs() {
    let v = json_stdout(&monoquad(&[
        "worst-case",
        "--spec",
        r#"{"kind":"stratified","boundaries":[0,0.25,0.5,0.75,1],"allocation":[1,1,1,1]}"#,
    ]));
    assert_eq!(v["certificate"]["worst_case_variance"], 0.015625);
    assert_eq!(v["certificate"]["witness"]["x0"], 0.125);
    assert_eq!(v["confirmed"], true);

    let out = monoquad(&["worst-case", "--spec", r#"{"kind":"simple_mc","n":1}"#]);
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(json_stdout(&out)["certificate"]["worst_case_variance"], 0.25);
    assert!(stderr.contains("worst case       0.25"), "{stderr}");

    let v = json_stdout(&monoquad(&["worst-case", "--spec", r#"{"kind":"control_variate","n":2}"#]));
    let w = v["certificate"]["worst_case_variance"].as_f64().unwrap();
    assert!((w - 1.0 / 24.0).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    assert_eq!(monoquad(&["worst-case", "--spec", "{not json"]).status.code(), Some(2));
    assert_eq!(
        monoquad(&["worst-case", "--spec", r#"{"kind":"importance","n":3}"#]).status.code(),
        Some(2)
    );
    assert_eq!(
        monoquad(&["worst-case", "--spec", r#"{"kind":"stratified","boundaries":[0,0.6,0.5,1],"allocation":[1,1,1]}"#])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(monoquad(&["worst-case", "--spec", r#"{"kind":"trapezoid","n":3}"#]).status.code(), Some(3));
    assert_eq!(monoquad(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        monoquad(&[
            "simulate",
            "--estimator",
            r#"{"kind":"simple_mc","n":3}"#,
            "--function",
            r#"{"kind":"unit_step","x0":0.5}"#,
            "--replications",
            "0"
        ])
        .status
        .code(),
        Some(3)
    );
    let out = monoquad(&["brute-force", "--spec", r#"{"kind":"simple_mc","n":1}"#, "--m", "30", "--g", "30"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("candidates"));
}

#[test]
fn simulate_deterministic_rule_json_and_csv() {
    let args = [
        "simulate",
        "--estimator",
        r#"{"kind":"trapezoid","n":3}"#,
        "--function",
        r#"{"kind":"unit_step","x0":0.6}"#,
        "--replications",
        "1",
    ];
    let v = json_stdout(&monoquad(&args));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["empirical_variance"], 0.0);
    assert!(v.get("wall_time").is_none());

    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = monoquad(&csv_args);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("schema,estimator,"));
    assert!(lines[1].starts_with("1,trapezoid,3,1,0,2,"));
}

#[test]
fn simulate_from_config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{"estimator":{"kind":"simple_mc","n":10},"function":{"kind":"preset","id":"identity"},"replications":1000,"seed":3}"#,
    )
    .unwrap();
    let v = json_stdout(&monoquad(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "5"]));
    assert_eq!(v["seed"], 5);
    assert_eq!(v["replications"], 1000);
    assert_eq!(v["estimator"], "simple_mc");
}

#[test]
fn brute_force_minimal_grid_and_delegation() {
    let v = json_stdout(&monoquad(&["brute-force", "--spec", r#"{"kind":"simple_mc","n":1}"#, "--m", "1", "--g", "1"]));
    assert_eq!(v["candidates"], 2);
    let v = json_stdout(&monoquad(&["brute-force", "--spec", r#"{"kind":"control_variate","n":1}"#, "--m", "4", "--g", "4"]));
    assert!((v["max_value"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-12);
    assert_eq!(v["heuristic"], false);
}

#[test]
fn lower_bound_demo() {
    let v = json_stdout(&monoquad(&[
        "lower-bound",
        "--spec",
        r#"{"kind":"simple_mc","n":1}"#,
        "--p",
        "1",
        "--replications",
        "20000",
    ]));
    assert_eq!(v["bound"], 0.125);
    assert_eq!(v["pass"], true);
    assert_eq!(v["integral_gap"], 0.5);

    let v = json_stdout(&monoquad(&[
        "lower-bound",
        "--spec",
        r#"{"kind":"stratified","boundaries":[0,0.25,0.5,0.75,1],"allocation":[1,1,1,1]}"#,
        "--replications",
        "20000",
    ]));
    let b = v["bound"].as_f64().unwrap();
    assert!((b - 0.5f64.powf(2.5) / 4.0).abs() < 1e-15);
    assert!((v["integral_gap"].as_f64().unwrap() - 0.125).abs() < 1e-15);
    assert_eq!(v["pass"], true);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = monoquad(&[
        "simulate",
        "--estimator",
        r#"{"kind":"control_variate","n":4}"#,
        "--function",
        r#"{"kind":"preset","id":"logistic"}"#,
        "--replications",
        "5000",
        "--seed",
        "17",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let manifest = dir.path().join("report.json.manifest.json");
    let m: Value = serde_json::from_slice(&fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["invocation"]["command"], "simulate");
    assert_eq!(m["seed"], 17);

    let replayed = dir.path().join("replayed.json");
    let r = monoquad(&["replay", manifest.to_str().unwrap(), "--out", replayed.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&replayed).unwrap());
}

#[test]
fn every_command_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("ratios", vec!["ratios", "--n-max", "4"]),
        ("worst-case", vec!["worst-case", "--spec", r#"{"kind":"simple_mc","n":2}"#]),
        ("brute-force", vec!["brute-force", "--spec", r#"{"kind":"simple_mc","n":2}"#, "--m", "3", "--g", "3"]),
        (
            "lower-bound",
            vec!["lower-bound", "--spec", r#"{"kind":"simple_mc","n":2}"#, "--replications", "1000"],
        ),
    ];
    for (name, args) in cases {
        let out = dir.path().join(format!("{name}.out"));
        let mut full = args.clone();
        full.extend(["--out", out.to_str().unwrap()]);
        assert!(monoquad(&full).status.success(), "{name}");
        let manifest = dir.path().join(format!("{name}.out.manifest.json"));
        let again = dir.path().join(format!("{name}.again"));
        assert!(monoquad(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()])
            .status
            .success());
        assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap(), "{name}");
    }
}

#[test]
fn jobs_flag_and_env_do_not_change_output() {
    let args = [
        "simulate",
        "--estimator",
        r#"{"kind":"simple_mc","n":6}"#,
        "--function",
        r#"{"kind":"preset","id":"sqrt"}"#,
        "--replications",
        "20000",
    ];
    let mut one = args.to_vec();
    one.extend(["--jobs", "1"]);
    let a = monoquad(&one);
    let b = Command::new(env!("CARGO_BIN_EXE_monoquad"))
        .args(args)
        .env("MONOQUAD_JOBS", "4")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}
