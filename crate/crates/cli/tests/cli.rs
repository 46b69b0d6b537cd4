//! Runs the binary and checks outputs, files and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatternet")).args(args).env_remove("SCATTERNET_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn value_of(out: &str, key: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(&format!("{key} = "))).unwrap();
    line.split(" = ").nth(1).unwrap().parse().unwrap()
}

#[test]
fn compose_identity_leaf() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "id.json", r#"{"network": {"type": "matrix", "m11": 1, "m12": 0, "m21": 0, "m22": 1}}"#);
    let o = run(&["compose", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("M11 = (1.0000000000000000e0, 0.0000000000000000e0)"));
    assert!(out.contains("M12 = (0.0000000000000000e0, 0.0000000000000000e0)"));
    assert!(out.contains("t = (1.0000000000000000e0, 0.0000000000000000e0)"));
    assert_eq!(value_of(&out, "T"), 1.0);
}

#[test]
fn ab_ring_preset_blocks_at_half_flux_quantum() {
    let o = run(&["ab-ring", "--k", "1.0", "--L", "6.2832", "--flux-phase", "3.14159"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(value_of(&stdout(&o), "T") < 1e-6);
}

#[test]
fn ab_ring_flux_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["ab-ring", "--k", "1.3", "--steps", "21", "--out", out, "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("ab_ring.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), 13);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 21);
    // Flux phase ±π sits at both ends of the grid; transmission vanishes there,
    // either numerically or exactly (reported through the flags column).
    for row in [&rows[0], &rows[20]] {
        let t: f64 = row[7].parse().unwrap();
        assert!(t < 1e-20 || row[12].contains("transmission vanishes"), "{row:?}");
    }
    assert!(rows[10][12].is_empty());
}

#[test]
fn bragg_preset_reports_invisibility_and_parallel_condition() {
    let o = run(&["bragg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("reflectionless from the left"));
    let o = run(&["bragg", "--parallel", "3", "--k", "9.98"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("n2 giving M21 = 0 for N = 3"));
    assert!(value_of(&out, "|M21| at that n2") < 1e-8);
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest", "--seed", "11", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches(" PASS").count(), 6, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn config_errors_exit_one_with_every_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"network": {"type": "free", "length": 1.0, "k": "omega", "colour": 3},
            "sweep": {"lo": 0.0, "hi": 1.0, "steps": 1}}"#,
    );
    let o = run(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("/sweep/steps"), "{err}");
    assert!(err.contains("/network/colour"), "{err}");
}

#[test]
fn single_branch_parallel_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "one.json",
        r#"{"network": {"type": "parallel", "k": 1.0, "branches": [{"node": {"type": "free", "length": 1.0, "k": 1.0}}]}}"#,
    );
    let o = run(&["compose", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("N=1 parallel is a pass-through"));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = run(&["sweep", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn composing_at_a_singularity_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"network": {"type": "matrix", "m11": 1, "m12": 1, "m21": -1, "m22": 0}}"#);
    let o = run(&["compose", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("spectral singularity"));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["sweep"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn help_lists_flags_with_defaults() {
    let o = run(&["bragg", "--help"]);
    let out = stdout(&o);
    for flag in ["--n0", "--n1", "--n2", "--beta", "--length", "--k", "--parallel", "--steps", "--tol", "--out", "--threads"] {
        assert!(out.contains(flag), "{flag} missing:\n{out}");
    }
    assert!(out.contains("[default: 1.5]"));
    assert!(out.contains("[env: SCATTERNET_THREADS=]"));
    let out = stdout(&run(&["sweep", "--help"]));
    for flag in ["--config", "--out", "--steps", "--tol", "--threads"] {
        assert!(out.contains(flag), "{flag} missing:\n{out}");
    }
}

#[test]
fn sweep_writes_csv_and_analysis_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "pt.json",
        r#"{"network": {"type": "pt", "a": [0.8, 0.6], "b": "w", "c": "w"},
            "sweep": {"parameter": "w", "lo": -1.5, "hi": 1.5, "steps": 31},
            "analyses": [{"kind": "exceptional_points", "mode": "single"},
                         {"kind": "singularities", "entry": "lasing"},
                         {"kind": "atr"}],
            "output": {"basename": "pt"}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["pt.csv", "pt_exceptional_points.json", "pt_singularities.json", "pt_atr.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let ep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("pt_exceptional_points.json")).unwrap()).unwrap();
    // b = c: the asymmetry never reaches ±2.
    assert_eq!(ep["exceptional_points"].as_array().unwrap().len(), 0);
    let csv = std::fs::read_to_string(out.join("pt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);
}
