//! Result records, CSV tables and JSON summaries.

use anyhow::{bail, Context, Result};
use anyonlab_core::manybody::EnergyBreakdown;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One experiment point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultRecord {
    pub experiment: String,
    pub label: String,
    pub params: BTreeMap<String, f64>,
    pub measured: f64,
    pub stderr: f64,
    pub predicted: Option<f64>,
    /// `measured - predicted`.
    pub discrepancy: Option<f64>,
    /// Extra numeric columns, e.g. the limiting-G prediction.
    pub extra: BTreeMap<String, f64>,
    pub breakdown: Option<EnergyBreakdown>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub seed: u64,
    pub code_version: String,
    pub wall_time: f64,
}

impl ResultRecord {
    pub fn new(experiment: &str, label: impl Into<String>, seed: u64) -> Self {
        ResultRecord {
            experiment: experiment.to_string(),
            label: label.into(),
            params: BTreeMap::new(),
            measured: f64::NAN,
            stderr: 0.0,
            predicted: None,
            discrepancy: None,
            extra: BTreeMap::new(),
            breakdown: None,
            warnings: Vec::new(),
            error: None,
            seed,
            code_version: CODE_VERSION.to_string(),
            wall_time: 0.0,
        }
    }

    pub fn param(mut self, k: &str, v: f64) -> Self {
        self.params.insert(k.to_string(), v);
        self
    }

    pub fn set_prediction(&mut self, predicted: f64) {
        self.predicted = Some(predicted);
        self.discrepancy = Some(self.measured - predicted);
    }

    pub fn failed(mut self, err: impl std::fmt::Display) -> Self {
        self.error = Some(err.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

/// Verdict on `|discrepancy|` along increasing `N` within one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Monotonicity {
    pub group: String,
    #[serde(rename = "N")]
    pub n: Vec<f64>,
    pub abs_discrepancy: Vec<f64>,
    /// Non-increasing up to one combined standard error per step.
    pub non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub experiment: String,
    pub code_version: String,
    pub records: usize,
    pub failed_records: usize,
    pub checks: Vec<Check>,
    pub monotonicity: Option<Vec<Monotonicity>>,
    pub pass: bool,
}

/// Groups records by every parameter except `N` and judges each group.
pub fn monotonicity(records: &[ResultRecord]) -> Vec<Monotonicity> {
    let mut groups: BTreeMap<String, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.discrepancy.is_some()) {
        let key = r
            .params
            .iter()
            .filter(|(k, _)| k.as_str() != "N")
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(group, mut rs)| {
            rs.sort_by(|a, b| a.params.get("N").partial_cmp(&b.params.get("N")).unwrap());
            let d: Vec<f64> = rs.iter().map(|r| r.discrepancy.unwrap().abs()).collect();
            let non_increasing = rs.windows(2).zip(d.windows(2)).all(|(r, d)| {
                let sigma = r[0].stderr.hypot(r[1].stderr);
                d[1] <= d[0] + sigma
            });
            Monotonicity {
                group,
                n: rs.iter().map(|r| r.params.get("N").copied().unwrap_or(f64::NAN)).collect(),
                abs_discrepancy: d,
                non_increasing,
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with a deterministic column order. Wall time is left out so that
/// reruns produce identical bytes.
pub fn to_csv(records: &[ResultRecord]) -> Result<String> {
    if records.is_empty() {
        bail!("no records to report");
    }
    let mut pkeys: Vec<&String> = records.iter().flat_map(|r| r.params.keys()).collect();
    pkeys.sort();
    pkeys.dedup();
    let mut xkeys: Vec<&String> = records.iter().flat_map(|r| r.extra.keys()).collect();
    xkeys.sort();
    xkeys.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment".to_string(), "label".to_string()];
    header.extend(pkeys.iter().map(|k| k.to_string()));
    header.extend(["measured", "stderr", "predicted", "discrepancy"].map(String::from));
    header.extend(xkeys.iter().map(|k| k.to_string()));
    header.extend(["seed", "code_version", "warnings", "error"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.experiment.clone(), r.label.clone()];
        row.extend(pkeys.iter().map(|k| fmt_opt(r.params.get(*k).copied())));
        row.push(r.measured.to_string());
        row.push(r.stderr.to_string());
        row.push(fmt_opt(r.predicted));
        row.push(fmt_opt(r.discrepancy));
        row.extend(xkeys.iter().map(|k| fmt_opt(r.extra.get(*k).copied())));
        row.push(r.seed.to_string());
        row.push(r.code_version.clone());
        row.push(r.warnings.join(";"));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Generic invariants every record must satisfy.
pub fn record_checks(records: &[ResultRecord]) -> Vec<Check> {
    let failed: Vec<&str> = records.iter().filter(|r| r.error.is_some()).map(|r| r.label.as_str()).collect();
    let bad_err: Vec<&str> =
        records.iter().filter(|r| !(r.stderr >= 0.0)).map(|r| r.label.as_str()).collect();
    let bad_disc: Vec<&str> = records
        .iter()
        .filter(|r| match (r.predicted, r.discrepancy) {
            (Some(p), Some(d)) => d != r.measured - p,
            (None, None) => false,
            _ => true,
        })
        .map(|r| r.label.as_str())
        .collect();
    vec![
        Check::new("all points completed", failed.is_empty(), failed.join(",")),
        Check::new("error bars non-negative", bad_err.is_empty(), bad_err.join(",")),
        Check::new("discrepancy = measured - predicted", bad_disc.is_empty(), bad_disc.join(",")),
    ]
}

pub fn summarize(experiment: &str, records: &[ResultRecord], mut checks: Vec<Check>) -> Result<Summary> {
    if records.is_empty() {
        bail!("no records to summarize");
    }
    let mut all = record_checks(records);
    all.append(&mut checks);
    let mono = match experiment {
        "convergence" | "g-scan" | "omega-scan" => Some(monotonicity(records)),
        _ => None,
    };
    Ok(Summary {
        experiment: experiment.to_string(),
        code_version: CODE_VERSION.to_string(),
        records: records.len(),
        failed_records: records.iter().filter(|r| r.error.is_some()).count(),
        pass: all.iter().all(|c| c.pass),
        checks: all,
        monotonicity: mono,
    })
}

fn write(path: &Path, body: &[u8]) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Writes `records.csv`, `records.json` and `summary.json` under `dir`.
pub fn persist(dir: &Path, records: &[ResultRecord], summary: &Summary) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("records.csv"), to_csv(records)?.as_bytes())?;
    write(&dir.join("records.json"), serde_json::to_string_pretty(records)?.as_bytes())?;
    write(&dir.join("summary.json"), serde_json::to_string_pretty(summary)?.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    write(path, serde_json::to_string_pretty(value)?.as_bytes())
}
