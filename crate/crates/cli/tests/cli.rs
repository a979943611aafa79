//! End-to-end runs of the `hybridmech` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hybridmech_cli::{parse_config, Units};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_hybridmech");

const SEMICLASSICAL: &str = r#"{
  "kind": "semiclassical",
  "physics": { "Omega": 0.01, "g": 1, "g_m": 0.02 },
  "initial": { "beta": [0, 10] },
  "run": { "periods": 2 }
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_body(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON in {text}"));
    serde_json::from_str::<Value>(line).unwrap()["error"].clone()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn semiclassical_run_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", SEMICLASSICAL);
    let out = tmp.path().join("out");
    let o = run(&["--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(out.join("semiclassical.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re_beta,im_beta,pe,delta_m"));
    // 16 samples per period plus the initial one
    assert_eq!(lines.count(), 33);
    let m: Value = serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(m["manifest_version"], 1);
    assert_eq!(m["files"][0], "semiclassical.csv");
    assert_eq!(m["normalized_physics"]["g_m"], 0.02);
    assert_eq!(m["config"]["kind"], "semiclassical");
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"kind": "ensemble", "physics": {"Omega": 0.01, "g": 1, "g_m": 0.005, "Gamma": 1e-6, "n_m": 2},
            "initial": {"beta": [0, 20]}, "run": {"periods": 1, "trajectories": 12, "seed": 3}}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run(&["--config", s(&cfg), "--out", s(&a)]).status.success());
    let o = run(&["--config", s(&a.join("manifest.json")), "--out", s(&b)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "ensemble.csv",
        "histogram_0.csv",
        "histogram_1.csv",
        "histogram_2.csv",
    ] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    let m: Value = serde_json::from_str(&read(a.join("manifest.json"))).unwrap();
    assert_eq!(m["seeds"]["master"], 3);
    assert_eq!(m["seeds"]["trajectories"].as_array().unwrap().len(), 12);
    assert_eq!(m["failed_trajectories"], 0);
}

#[test]
fn overrides_change_seed_and_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"kind": "ensemble", "physics": {"Omega": 0.01, "g": 1, "g_m": 0.005, "Gamma": 1e-6, "n_m": 2},
            "initial": {"beta": [0, 20]}, "run": {"periods": 1, "trajectories": 6, "seed": 3}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["--config", s(&cfg), "--out", s(&a)]).status.success());
    assert!(run(&[
        "--config",
        s(&cfg),
        "--out",
        s(&b),
        "--seed",
        "4",
        "--trajectories",
        "7"
    ])
    .status
    .success());
    assert_ne!(read(a.join("ensemble.csv")), read(b.join("ensemble.csv")));
    let m: Value = serde_json::from_str(&read(b.join("manifest.json"))).unwrap();
    assert_eq!(m["config"]["run"]["seed"], 4);
    assert_eq!(m["seeds"]["trajectories"].as_array().unwrap().len(), 7);

    let c = tmp.path().join("c");
    assert!(
        run(&["--config", s(&cfg), "--out", s(&c), "--kind", "spectra"])
            .status
            .success()
    );
    assert!(read(c.join("spectra.csv")).starts_with("delta,re_s0\n"));
}

#[test]
fn absolute_and_normalized_units_give_identical_output() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"{"kind": "semiclassical", "units": "hertz",
        "physics": {"gamma": 7e6, "g": 7e6, "Omega": 7e4, "g_m": 1.4e5, "delta0": 3.5e5},
        "initial": {"beta": [0, 10]}, "run": {"periods": 1}}"#;
    let abs = write(tmp.path(), "abs.json", text);
    let raw = parse_config(text).unwrap();
    let norm = raw.to_normalized().unwrap();
    assert_eq!(norm.units, Units::Normalized);
    let norm = write(
        tmp.path(),
        "norm.json",
        &serde_json::to_string(&norm).unwrap(),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["--config", s(&abs), "--out", s(&a)]).status.success());
    assert!(run(&["--config", s(&norm), "--out", s(&b)])
        .status
        .success());
    assert_eq!(
        read(a.join("semiclassical.csv")),
        read(b.join("semiclassical.csv"))
    );
}

#[test]
fn strong_drive_spectrum_has_two_peaks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"kind": "spectra", "physics": {"Omega": 0.01, "g": 10, "g_m": 0.01},
            "spectra": {"delta_min": -20, "delta_max": 20, "points": 401}}"#,
    );
    let out = tmp.path().join("o");
    assert!(run(&["--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let rows: Vec<(f64, f64)> = read(out.join("spectra.csv"))
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (f.next().unwrap(), f.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 401);
    let peaks: Vec<f64> = rows
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1)
        .map(|w| w[1].0)
        .collect();
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!((peaks[0] + peaks[1]).abs() < 1e-9);
    assert!(rows.iter().all(|r| r.1 >= 0.0));
}

#[test]
fn phase_diagram_has_three_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"kind": "phase-diagram", "physics": {"Omega": 0.01, "g": 1, "g_m": 0.01},
            "phase_diagram": {"n_m_min": 1e-3, "n_m_max": 1e7, "ratio_min": 1e-4, "ratio_max": 1e4, "points": 20}}"#,
    );
    let out = tmp.path().join("o");
    assert!(run(&["--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let csv = read(out.join("phase_diagram.csv"));
    assert!(csv.starts_with("n_m,gamma_ratio,label\n"));
    assert_eq!(csv.lines().count(), 401);
    for l in ["tls_induced", "effective_thermal", "thermal"] {
        assert!(csv.lines().any(|r| r.ends_with(&format!(",{l}"))), "{l}");
    }
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");

    let o = run(&[
        "--config",
        s(&tmp.path().join("missing.json")),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_body(&o)["field"], "--config");

    let cfg = write(
        tmp.path(),
        "typo.json",
        r#"{"physics": {"omega": 0.01, "g": 1, "g_m": 0.02}}"#,
    );
    let o = run(&["--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_body(&o);
    assert_eq!(e["kind"], "config");
    assert_eq!(e["field"], "physics.omega");
    assert_eq!(e["exit_code"], 2);

    let cfg = write(
        tmp.path(),
        "neg.json",
        r#"{"physics": {"Omega": -1, "g": 1, "g_m": 0.02}}"#,
    );
    let o = run(&["--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_body(&o)["field"], "physics.Omega");

    let cfg = write(
        tmp.path(),
        "both.json",
        r#"{"units": "hertz",
        "physics": {"gamma": 1e6, "Omega": 1e4, "g": 1e6, "g_m": 1e4, "n_m": 3, "T_m": 1}}"#,
    );
    let o = run(&["--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_body(&o)["field"], "physics.n_m");

    let cfg = write(tmp.path(), "ok.json", SEMICLASSICAL);
    let o = run(&["--config", s(&cfg), "--out", s(&out), "--kind", "histogram"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_body(&o)["field"], "--kind");

    let o = run(&["--config", s(&cfg), "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_body(&o)["kind"], "config");

    let blocker = write(tmp.path(), "file", "");
    let o = run(&["--config", s(&cfg), "--out", s(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_body(&o)["field"], "output.dir");
}

#[test]
fn numerical_failures_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    // 16 steps per period break the step-size bound
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"physics": {"Omega": 0.01, "g": 1, "g_m": 0.02}, "run": {"periods": 1, "steps_per_period": 16}}"#,
    );
    let o = run(&["--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_body(&o)["kind"], "runtime");
}

#[test]
fn failed_self_check_exits_4_after_writing_summary() {
    let tmp = tempfile::tempdir().unwrap();
    // a single trajectory has no standard error, so the ensemble check cannot pass
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"kind": "validate", "physics": {"Omega": 0.01, "g": 1, "g_m": 0.005},
            "validate": {"trajectories": 1, "periods": 1}}"#,
    );
    let out = tmp.path().join("o");
    let o = run(&["--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_body(&o)["kind"], "validation");
    let v: Value = serde_json::from_str(&read(out.join("validation.json"))).unwrap();
    assert_eq!(v["passed"], false);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(
        checks[..4].iter().all(|c| c["passed"] == true),
        "{checks:?}"
    );
}

#[test]
fn validate_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"kind": "validate", "physics": {"Omega": 0.01, "g": 1, "g_m": 0.005},
            "run": {"seed": 11}, "validate": {"trajectories": 300, "periods": 2}}"#,
    );
    let out = tmp.path().join("o");
    let o = run(&["--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&read(out.join("validation.json"))).unwrap();
    assert_eq!(v["passed"], true);
}
