use std::fs;
use std::path::PathBuf;

use hyperkloos::sweep::{run_diag, run_sweep, DiagConfig, SweepConfig};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_parse_and_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("diag") {
            let cfg: DiagConfig = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let rep = run_diag(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(rep.checks.all(), "{name}");
        } else {
            let cfg: SweepConfig = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        seen += 1;
    }
    assert!(seen >= 4);
}

#[test]
fn small_sweep_rows_are_consistent() {
    let text = fs::read_to_string(configs_dir().join("sweep_small.json")).unwrap();
    let cfg: SweepConfig = serde_json::from_str(&text).unwrap();
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.rows.len(), 6);
    assert_eq!(out.summary.energy.len(), 6);
    assert_eq!(out.summary.diag.len(), 6);
    for row in &out.rows {
        assert!(row.abs_s <= row.trivial_bound + 1e-9);
        assert!((row.ratio_s_over_mn - row.abs_s / (row.m as f64 * row.n as f64)).abs() < 1e-15);
    }
    let csv = out.csv();
    let parsed: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for (cells, row) in parsed.iter().zip(&out.rows) {
        assert_eq!(cells[7].parse::<f64>().unwrap(), row.abs_s);
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let text = r#"{"primes": [101], "r": 2, "ell": 2, "set": {"kind": "random", "size": 3},
        "interval": {"length": 5}, "trials": 1, "seed": 0, "sede": 1}"#;
    assert!(serde_json::from_str::<SweepConfig>(text).is_err());
}
