use std::path::Path;
use std::process::Command;

fn anyonlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_anyonlab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn twobody_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"alpha": 0.1, "R": 0.001, "b": 0.1, "g": 2.0}"#);
    let out = dir.path().join("o");
    let o = anyonlab(&["twobody", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("twobody.json")).unwrap()).unwrap();
    assert!((rep["G"].as_f64().unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(rep["bracketOk"], true);
}

#[test]
fn unknown_keys_fail_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"alpha": 0.1, "R": 0.001, "b": 0.1, "g": 2.0, "gg": 1}"#);
    let o = anyonlab(&["twobody", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gg"));
    let o = anyonlab(&["twobody"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nll_subcommand_writes_field_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"P": [[0,0],[1,0]], "Q": [[1,0]], "L": 100.0, "n": 256, "tol": 1e-3}"#);
    let out = dir.path().join("o");
    let o = anyonlab(&["nll", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(std::fs::metadata(out.join("nll.bin")).unwrap().len(), 16 * 256 * 256);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("nll.json")).unwrap()).unwrap();
    assert_eq!(side["n"], 256);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("nll-report.json")).unwrap()).unwrap();
    assert_eq!(rep["beta"], 2.0);

    let dep = write(dir.path(), "d.json", r#"{"P": [[0,0],[1,0]], "Q": [[0,0],[1,0]], "L": 20.0, "n": 64}"#);
    assert_eq!(anyonlab(&["nll", "--config", &dep, "--out", out.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn css_subcommand_reports_divergence_as_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"beta": 2.0, "gamma": -37.7, "V": {"kind": "zero"}, "L": 32.0, "n": 128, "tol": 1e-6, "maxIter": 300, "startWidth": 1.5}"#,
    );
    let out = dir.path().join("o");
    let o = anyonlab(&["css", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("css-report.json")).unwrap()).unwrap();
    assert!(rep["diverged"].is_string());
}

#[test]
fn css_subcommand_harmonic_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"beta": 0.0, "gamma": 0.0, "V": {"kind": "harmonic", "coef": 1.0}, "L": 14.0, "n": 64, "tol": 1e-6, "maxIter": 2000, "seed": 3}"#,
    );
    let out = dir.path().join("o");
    let o = anyonlab(&["css", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("css-report.json")).unwrap()).unwrap();
    assert!((rep["energy"]["total"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(out.join("css.bin").exists() && out.join("css.json").exists());
}

#[test]
fn convergence_and_report_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"version": 1, "seed": 4, "experiment": {"kind": "convergence", "N": [8, 12], "beta": 0.0,
            "omega": [1.0], "bExponent": 2.5, "g": [0.0], "condensate": {"supportRadius": 1.0},
            "sampler": {"burnIn": 200, "sweeps": 4000, "chains": 2}, "grid": {"L": 4.0, "n": 128}}}"#,
    );
    let a = dir.path().join("a");
    let o = anyonlab(&["convergence", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(a.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(summary["monotonicity"].is_array());

    // the same seed reproduces the table, --seed changes it
    let b = dir.path().join("b");
    anyonlab(&["convergence", "--config", &cfg, "--out", b.to_str().unwrap()]);
    assert_eq!(csv, std::fs::read_to_string(b.join("records.csv")).unwrap());
    let c = dir.path().join("c");
    anyonlab(&["convergence", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "5"]);
    assert_ne!(csv, std::fs::read_to_string(c.join("records.csv")).unwrap());

    let r = dir.path().join("r");
    let recs = a.join("records.json");
    let o = anyonlab(&["report", "--config", recs.to_str().unwrap(), "--out", r.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(csv, std::fs::read_to_string(r.join("records.csv")).unwrap());

    let empty = write(dir.path(), "e.json", "[]");
    assert_eq!(anyonlab(&["report", "--config", &empty, "--out", r.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn gammastar_subcommand_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"betas": [2.0], "L": 24.0, "n": 64, "restarts": 1, "maxIter": 20}"#);
    let out = dir.path().join("o");
    anyonlab(&["gammastar", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let csv = std::fs::read_to_string(out.join("gammastar.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "beta,estimate,spread");
    assert_eq!(lines.len(), 2);
}
