use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperkloos"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn sweep_config(dir: &Path, primes: &str, trials: u32, csv: &str) -> String {
    let csv = dir.join(csv);
    let body = format!(
        r#"{{"primes": {primes}, "r": 2, "ell": 2,
            "set": {{"kind": "random", "size": 15}},
            "interval": {{"offset": 1, "length": {{"exponent": 0.75}}}},
            "weight_kinds": ["ones", "bounded"],
            "trials": {trials}, "seed": 42,
            "output": {{"csv": {csv:?}}}}}"#
    );
    write_config(dir, "sweep.json", &body)
}

#[test]
fn non_prime_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), "[4]", 1, "out.csv");
    let out = run(&["bilinear", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NotPrime"), "{}", stderr(&out));
}

#[test]
fn sweep_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), "[101, 211, 307]", 2, "out.csv");
    assert!(run(&["bilinear", "--config", &cfg]).status.success());
    let first = fs::read(dir.path().join("out.csv")).unwrap();
    assert!(run(&["bilinear", "--config", &cfg]).status.success());
    let second = fs::read(dir.path().join("out.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn three_primes_two_trials_give_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), "[101, 211, 307]", 2, "rows.csv");
    let out = run(&["bilinear", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,r,ℓ,M,N,weight_kind,seed,abs_S,trivial_bound,delta,theorem_bound,ratio_S_over_trivial,ratio_S_over_MN"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 13);
        let abs_s: f64 = cells[7].parse().unwrap();
        let trivial: f64 = cells[8].parse().unwrap();
        assert!(abs_s <= trivial);
    }
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"primes": [101], "r": 2}"#);
    let out = run(&["bilinear", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("config error"));
}

#[test]
fn table_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let out = run(&["table", "--p", "5", "--r", "2", "--method", "naive", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,re,im");
    assert_eq!(lines.len(), 5);
    let k1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((k1 - 0.17082).abs() < 1e-4);
}

#[test]
fn table_rejects_composite_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.csv");
    let p = path.to_str().unwrap();
    let out = run(&["table", "--p", "9", "--r", "2", "--out", p]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["table", "--p", "101", "--r", "4", "--method", "naive", "--budget", "1000", "--out", p]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_passes_on_small_range() {
    let out = run(&["verify", "--p-max", "200", "--r-max", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("tables="));
}

#[test]
fn energy_prints_report_row() {
    let out = run(&["energy", "--p", "7", "--H", "3", "--set", "1,2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,H,M,J,case,leading,case_term,bound_total,diagonal_lb,cauchy_lb");
    assert!(lines[1].starts_with("7,3,2,6,"));

    let brute = run(&["energy", "--p", "101", "--H", "20", "--set", "interval:1:10", "--method", "brute", "--grh"]);
    let fast = run(&["energy", "--p", "101", "--H", "20", "--set", "interval:1:10", "--grh"]);
    assert!(brute.status.success() && fast.status.success());
    assert_eq!(brute.stdout, fast.stdout);

    assert_eq!(run(&["energy", "--p", "7", "--H", "9", "--set", "all"]).status.code(), Some(2));
    assert_eq!(run(&["energy", "--p", "7", "--H", "3", "--set", "0,1"]).status.code(), Some(2));
    assert_eq!(run(&["energy", "--p", "7", "--H", "3", "--set", "interval:3"]).status.code(), Some(2));
}

#[test]
fn diag_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "diag.json",
        r#"{"p": 7, "r": 2, "ell": 2, "set": {"kind": "explicit", "elements": [1, 2]},
            "interval": {"length": 2}, "A": 1, "B": 0}"#,
    );
    let out = run(&["diag", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["R1"], 8.0);
    assert_eq!(json["R2"], 8.0);
    assert_eq!(json["ℓ"], 2);
    assert_eq!(json["checks"]["cauchy"], true);
}

#[test]
fn diag_rejects_oversized_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "diag.json",
        r#"{"p": 101, "r": 2, "ell": 2, "set": {"kind": "random", "size": 5},
            "interval": {"length": 10}, "A": 2, "B": 3}"#,
    );
    let out = run(&["diag", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("2AB"), "{}", stderr(&out));
}
