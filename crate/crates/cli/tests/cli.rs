use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parrondo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("parrondo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn analyze_examples() {
    let v = json(&["analyze", "--parrondo", "3", "0.75", "0.1"]);
    assert_eq!(v["class"], "fair");
    assert!(num(&v, "lambda").abs() < 1e-15);

    let v = json(&["analyze", "--parrondo", "3", "5/8", "3/10"]);
    assert_eq!(v["class"], "winning");
    assert!((num(&v, "lambda") - 0.0254).abs() < 5e-5);
    assert!(num(&v, "lambda_difference").abs() < 1e-12);
    assert_eq!(v["cofactors"].as_array().unwrap().len(), 3);
    assert_eq!(v["tau"].as_array().unwrap().len(), 5);

    let v = json(&["analyze", "--m", "1", "--p", "0.6", "--q", "0.4"]);
    assert!((num(&v, "lambda") - 0.2).abs() < 1e-15);
}

#[test]
fn analyze_report_round_trips() {
    let first = run(&[
        "analyze",
        "--m",
        "4",
        "--p",
        "0.3,0.55,0.8,0.45",
        "--q",
        "0.6,0.4,0.1,0.5",
    ]);
    assert!(first.status.success());
    let path = scratch("report.json");
    std::fs::write(&path, &first.stdout).unwrap();
    let second = run(&["analyze", "--game", path.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn parrondo_spec_file_is_accepted() {
    let path = scratch("spec.json");
    std::fs::write(&path, r#"{"m": 3, "p": "3/4", "pp": "1/10"}"#).unwrap();
    let v = json(&["analyze", "--game", path.to_str().unwrap()]);
    assert_eq!(v["class"], "fair");
}

#[test]
fn invalid_input_exits_with_two() {
    let out = run(&["analyze", "--parrondo", "3", "1.2", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("between 0 and 1"));

    let out = run(&["analyze", "--m", "3", "--p", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["diffusion", "invert", "--p", "0.6,0.6,0.6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not recurrent"));

    let out = run(&["analyze", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    // Q vanishes identically for r = 1, so no root can be bracketed
    let out = run(&["qpoly", "--a", "1", "--lambda", "1", "--r", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn random_mixture_of_fair_games_wins() {
    let v = json(&[
        "mix",
        "random",
        "--pi",
        "0.5",
        "--parrondo",
        "3",
        "0.5",
        "0.5",
        "--parrondo",
        "3",
        "0.75",
        "0.1",
    ]);
    assert_eq!(v["class"], "winning");
    assert!((num(&v, "lambda") - 0.0253878702).abs() < 1e-9);
    assert!(num(&v, "q_at_x") > 0.0);
}

#[test]
fn pattern_mixtures() {
    let v = json(&[
        "mix",
        "pattern",
        "--sched",
        "AB",
        "--parrondo",
        "3",
        "0.5",
        "0.5",
        "--parrondo",
        "3",
        "0.75",
        "0.1",
    ]);
    assert_eq!(v["class"], "fair");
    let v = json(&[
        "mix",
        "pattern",
        "--sched",
        "AABB",
        "--parrondo",
        "3",
        "0.5",
        "0.5",
        "--parrondo",
        "3",
        "0.75",
        "0.1",
    ]);
    assert!((num(&v, "lambda") - 4.0 / 163.0).abs() < 1e-14);
    let v = json(&[
        "mix",
        "pattern",
        "--sched",
        "AB",
        "--parrondo",
        "4",
        "0.6",
        "0.3",
        "--parrondo",
        "4",
        "0.45",
        "0.8",
    ]);
    assert!(v["quotient_even"].is_number() && v["quotient_odd"].is_number());
}

#[test]
fn qpoly_csv() {
    let out = run(&["qpoly", "--a", "1", "--lambda", "1", "--r", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "degree,coefficient\n0,-6\n1,12\n2,0\n3,-12\n4,6\n");

    let v = json(&[
        "qpoly",
        "--pi",
        "0.5",
        "--parrondo",
        "3",
        "0.75",
        "0.1",
        "--parrondo",
        "3",
        "0.5",
        "0.5",
        "--format",
        "json",
    ]);
    assert!(num(&v, "q_at_x") > 0.0);
    assert_eq!(v["r"], 2);
}

#[test]
fn diffusion_commands() {
    let v = json(&["diffusion", "forward", "--mu", "0,0,0"]);
    assert_eq!(v["p"], serde_json::json!([0.5, 0.5, 0.5]));

    let v = json(&["diffusion", "invert", "--p", "0.1,0.75,0.75"]);
    let mu: Vec<f64> = v["mu"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (a, b) in mu.iter().zip([-0.687032, 2.748128, -2.06110]) {
        assert!((a - b).abs() < 1e-4);
    }
    assert!((num(&v, "theta") - 0.75).abs() < 1e-12);
    assert!((num(&v, "alpha") - 0.25).abs() < 1e-12);
    assert!(num(&v, "w") > 1.0);

    let mu_csv = mu.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let v = json(&["diffusion", "forward", "--mu", &mu_csv]);
    for (a, b) in v["p"].as_array().unwrap().iter().zip([0.1, 0.75, 0.75]) {
        assert!((a.as_f64().unwrap() - b).abs() < 1e-12);
    }
}

#[test]
fn simulate_is_reproducible_and_traces() {
    let args = [
        "simulate",
        "--parrondo",
        "3",
        "0.625",
        "0.3",
        "--steps",
        "2000",
        "--replicas",
        "50",
        "--seed",
        "17",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["z_tau0"].is_number());

    let trace = scratch("trace.csv");
    let out = run(&[
        "simulate",
        "--sched",
        "AABB",
        "--parrondo",
        "3",
        "0.5",
        "0.5",
        "--parrondo",
        "3",
        "0.75",
        "0.1",
        "--steps",
        "500",
        "--replicas",
        "4",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,fortune"));
    assert_eq!(lines.next(), Some("0,0"));
    assert_eq!(text.lines().count(), 502);

    let out = run(&[
        "simulate",
        "--parrondo",
        "3",
        "0.5",
        "0.5",
        "--steps",
        "100",
        "--burn-in",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn sweep_rows(family: &str, from: &str, to: &str) -> Vec<Vec<f64>> {
    let out = run(&[
        "sweep",
        "--family",
        family,
        "--eps-from",
        from,
        "--eps-to",
        to,
        "--eps-step",
        "0.005",
        "--n",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,lambda,n_lambda"));
    lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_families() {
    let rows = sweep_rows("game-b", "0", "0.005");
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1].abs() < 1e-15);
    assert!((rows[1][2] + 0.87).abs() < 0.01);

    let rows = sweep_rows("mixed", "0", "0.005");
    assert!((rows[0][1] - 0.0254).abs() < 5e-5);
    assert!((rows[1][2] - 1.57).abs() < 0.01);

    let rows = sweep_rows("game-a", "0.005", "0.005");
    assert!((rows[0][2] + 1.0).abs() < 1e-12);

    let out = run(&["sweep", "--family", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
