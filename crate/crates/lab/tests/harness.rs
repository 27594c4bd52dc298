use anyonlab::config::{load, Experiment, ExperimentConfig, ScheduleScan};
use anyonlab::fieldio::{read_field, write_field};
use anyonlab::report::{monotonicity, to_csv, ResultRecord};
use anyonlab::run_experiment;
use anyonlab_core::meanfield::{nll_state, PolynomialPair};
use std::f64::consts::PI;
use std::path::Path;

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scan(beta: f64, n: Vec<usize>, omega: Vec<f64>, g: Vec<f64>, sweeps: usize) -> ScheduleScan {
    serde_json::from_value(serde_json::json!({
        "N": n, "beta": beta, "omega": omega, "bExponent": 2.5, "g": g,
        "condensate": { "supportRadius": 1.0 },
        "potential": { "kind": "harmonic", "coef": 1.0 },
        "sampler": { "burnIn": 500, "sweeps": sweeps, "chains": 2 },
        "grid": { "L": 4.0, "n": 128 }
    }))
    .unwrap()
}

fn experiment(e: Experiment) -> ExperimentConfig {
    ExperimentConfig { version: 1, seed: 17, experiment: e, out_dir: None }
}

#[test]
fn shipped_configs_parse_and_validate() {
    for name in ["convergence", "omega-scan", "nll-suite", "gammastar-scan"] {
        let cfg: ExperimentConfig = load(&configs().join(format!("{name}.json"))).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.experiment.kind(), name);
    }
    load::<anyonlab::config::CssConfig>(&configs().join("css.json")).unwrap().check().unwrap();
    load::<anyonlab::config::NllConfig>(&configs().join("nll.json")).unwrap().check().unwrap();
    load::<anyonlab::config::TwoBodyConfig>(&configs().join("twobody.json")).unwrap().check().unwrap();
    load::<anyonlab::config::VmcRunConfig>(&configs().join("vmc.json")).unwrap().check().unwrap();
}

#[test]
fn unknown_keys_and_versions_are_rejected() {
    let good = serde_json::json!({
        "version": 1, "seed": 1,
        "experiment": { "kind": "gammastar-scan", "betas": [2], "grid": { "L": 24.0, "n": 64 }, "restarts": 1 }
    });
    serde_json::from_value::<ExperimentConfig>(good.clone()).unwrap().validate().unwrap();
    let mut top = good.clone();
    top["extra"] = 1.into();
    assert!(serde_json::from_value::<ExperimentConfig>(top).is_err());
    let mut inner = good.clone();
    inner["experiment"]["restart"] = 1.into();
    assert!(serde_json::from_value::<ExperimentConfig>(inner).is_err());
    let mut grid = good.clone();
    grid["experiment"]["grid"]["h"] = 1.into();
    assert!(serde_json::from_value::<ExperimentConfig>(grid).is_err());
    let mut ver = good;
    ver["version"] = 2.into();
    assert!(serde_json::from_value::<ExperimentConfig>(ver).unwrap().validate().is_err());
}

#[test]
fn invalid_grids_are_rejected() {
    let empty = experiment(Experiment::Convergence(scan(1.0, vec![], vec![1.0], vec![0.0], 10)));
    assert!(empty.validate().is_err());
    // alpha = beta/(N-1) >= 1/4
    let bad = experiment(Experiment::Convergence(scan(1.0, vec![4], vec![1.0], vec![0.0], 10)));
    assert!(bad.validate().is_err());
    let odd: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "version": 1, "seed": 1,
        "experiment": { "kind": "nll-suite", "betas": [3], "pairsPerBeta": 1, "grid": { "L": 24.0, "n": 64 } }
    }))
    .unwrap();
    assert!(odd.validate().is_err());
}

#[test]
fn report_of_nothing_is_an_error() {
    assert!(to_csv(&[]).is_err());
    assert!(anyonlab::report::summarize("convergence", &[], vec![]).is_err());
}

#[test]
fn one_record_gives_header_and_one_row() {
    let mut r = ResultRecord::new("convergence", "x", 3).param("N", 8.0);
    r.measured = 1.5;
    r.stderr = 0.1;
    r.set_prediction(1.25);
    let csv = to_csv(&[r]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("experiment,label,N,measured,stderr,predicted,discrepancy"));
    assert!(lines[1].contains(",0.25,"));
    assert!(!lines[0].contains("wall"));
}

#[test]
fn trivial_statistics_reproduce_kinetic_plus_trap() {
    let cfg = experiment(Experiment::Convergence(scan(0.0, vec![8, 16], vec![1.0], vec![0.0], 20000)));
    let run = run_experiment(&cfg, None).unwrap();
    assert!(run.summary.pass, "{:#?}", run.summary.checks);
    assert!(run.summary.checks.iter().any(|c| c.name.starts_with("alpha = 0")));
    for r in &run.records {
        let d = r.discrepancy.unwrap();
        assert!(d.abs() <= 3.0 * r.stderr + 1e-6, "{d} vs {}", r.stderr);
        assert_eq!(r.extra["mc.W"], 0.0);
    }
}

#[test]
fn reruns_give_identical_tables() {
    let cfg = experiment(Experiment::Convergence(scan(0.5, vec![8, 12], vec![1.0], vec![1.0], 3000)));
    let a = run_experiment(&cfg, None).unwrap();
    let b = run_experiment(&cfg, None).unwrap();
    assert_eq!(to_csv(&a.records).unwrap(), to_csv(&b.records).unwrap());
    let c = run_experiment(&cfg, Some(99)).unwrap();
    assert_ne!(to_csv(&a.records).unwrap(), to_csv(&c.records).unwrap());
}

#[test]
fn convergence_verdict_is_recomputable_from_rows() {
    let cfg = experiment(Experiment::Convergence(scan(0.5, vec![8, 12, 16], vec![1.0], vec![0.0, 2.0], 3000)));
    let run = run_experiment(&cfg, None).unwrap();
    let verdict = run.summary.monotonicity.clone().expect("verdict present");
    assert_eq!(verdict.len(), 2);
    // recompute from the CSV rows alone
    let csv = to_csv(&run.records).unwrap();
    let mut rd = csv::Reader::from_reader(csv.as_bytes());
    let head = rd.headers().unwrap().clone();
    let col = |name: &str| head.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    for v in &verdict {
        let g: f64 = v.group.split(',').find_map(|kv| kv.strip_prefix("g=")).unwrap().parse().unwrap();
        let mut pts: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r[col("g")].parse::<f64>().unwrap() == g)
            .map(|r| (r[col("N")].parse().unwrap(), r[col("discrepancy")].parse::<f64>().unwrap().abs(), r[col("stderr")].parse().unwrap()))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let ok = pts.windows(2).all(|w| w[1].1 <= w[0].1 + w[0].2.hypot(w[1].2));
        assert_eq!(ok, v.non_increasing);
    }
    assert_eq!(monotonicity(&run.records), verdict);
}

#[test]
fn predicted_quartic_coefficients() {
    // g = 2: 2 pi beta for every omega; g = 0: 2 pi beta tanh(beta omega) in the limit
    let beta = 0.5;
    let cfg = experiment(Experiment::OmegaScan(scan(beta, vec![12], vec![1.0, 2.0, 4.0], vec![0.0, 2.0], 200)));
    let run = run_experiment(&cfg, None).unwrap();
    for r in &run.records {
        assert!(r.error.is_none(), "{:?}", r.error);
        let (omega, g) = (r.params["omega"], r.params["g"]);
        if g == 2.0 {
            assert!((r.extra["quarticCoef"] - 2.0 * PI * beta).abs() < 1e-12);
            assert!((r.extra["quarticCoefLimit"] - 2.0 * PI * beta).abs() < 1e-12);
        } else {
            let want = 2.0 * PI * beta * (beta * omega).tanh();
            assert!((r.extra["quarticCoefLimit"] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn failed_points_are_kept() {
    // R = exp(-N omega) underflows: the point runs with R = 0 or records its error
    let cfg = experiment(Experiment::Convergence(scan(0.5, vec![8], vec![1.0, 200.0], vec![1.0], 200)));
    let run = run_experiment(&cfg, None).unwrap();
    assert_eq!(run.records.len(), 2);
    let under = run.records.iter().find(|r| r.params["omega"] == 200.0).unwrap();
    assert!(under.warnings.iter().any(|w| w == "r-underflow"));
}

#[test]
fn nll_suite_runs() {
    let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "version": 1, "seed": 5,
        "experiment": { "kind": "nll-suite", "betas": [2, 4], "pairsPerBeta": 2, "grid": { "L": 48.0, "n": 256 }, "taper": 0.7, "tol": 1e-4 }
    }))
    .unwrap();
    let run = run_experiment(&cfg, None).unwrap();
    assert_eq!(run.records.len(), 4);
    assert!(run.summary.pass, "{:#?}", run.summary.checks);
}

#[test]
fn field_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let st = nll_state(&PolynomialPair::monomial(1), 20.0, 32).unwrap();
    let path = dir.path().join("u.bin");
    write_field(&path, &st.u).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 * 32 * 32);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("u.json")).unwrap()).unwrap();
    assert_eq!(side["L"], 20.0);
    assert_eq!(side["n"], 32);
    let back = read_field(&path).unwrap();
    assert_eq!(back, st.u);
    std::fs::write(&path, [0u8; 10]).unwrap();
    assert!(read_field(&path).is_err());
}
