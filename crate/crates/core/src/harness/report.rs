//! Versioned JSON reports and CSV tables.
//!
//! A report is a JSON object with the keys, in this order:
//!
//! | key          | content                                                      |
//! |--------------|--------------------------------------------------------------|
//! | `schema`     | [`SCHEMA`]                                                   |
//! | `experiment` | subcommand name                                              |
//! | `config`     | the resolved configuration (output paths omitted)           |
//! | `results`    | experiment-specific tables, one entry per `N`                |
//! | `summary`    | `{ passed, checks: [{ name, n, value, threshold, passed }] }` |
//! | `metadata`   | timestamps, wall-clock and per-trial timing, version         |
//!
//! Everything except `metadata` is a pure function of the configuration, so two
//! runs can be compared byte for byte after dropping that key. Floats use the
//! shortest decimal that round-trips to the same IEEE-754 double, in JSON and in CSV.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

pub const SCHEMA: &str = "wignerlab.report/1";

/// One thresholded quantity. `value <= threshold` or `value >= threshold` depending
/// on the check; `passed` carries the verdict. Undefined values (for example a
/// median over zero samples) are written as `null` and never pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub n: Option<usize>,
    #[serde(deserialize_with = "nullable_f64")]
    pub value: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub threshold: f64,
    pub passed: bool,
}

fn nullable_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Check {
    pub fn at_most(name: impl Into<String>, n: Option<usize>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            n,
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, n: Option<usize>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            n,
            value,
            threshold,
            passed: value >= threshold,
        }
    }

    /// A yes/no condition, recorded as value 1 or 0 against threshold 1.
    pub fn flag(name: impl Into<String>, n: Option<usize>, ok: bool) -> Self {
        Self {
            name: name.into(),
            n,
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn new(checks: Vec<Check>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub elapsed_secs: f64,
    /// Trials executed across all sizes, including failed ones.
    pub trials_run: usize,
    /// Sum of per-trial wall-clock times.
    pub trial_secs_total: f64,
    pub trial_secs_mean: f64,
    pub threads: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub results: Value,
    pub summary: Summary,
    pub metadata: Metadata,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report without `metadata`, which is what determinism is promised for.
    pub fn body_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            m.remove("metadata");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

pub(crate) fn now_unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Checks the structure every report shares. Experiment-specific `results` are
/// only required to be an object.
pub fn validate_report(v: &Value) -> Result<()> {
    let bad = |msg: &str| Err(Error::Config(format!("report schema violation: {msg}")));
    let Some(obj) = v.as_object() else {
        return bad("not an object");
    };
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    let expected = ["schema", "experiment", "config", "results", "summary", "metadata"];
    if keys.len() != expected.len() || expected.iter().any(|k| !obj.contains_key(*k)) {
        return bad(&format!("keys {keys:?}, expected {expected:?}"));
    }
    if obj["schema"] != SCHEMA {
        return bad("unknown schema tag");
    }
    if serde_json::from_value::<ExperimentKind>(obj["experiment"].clone()).is_err() {
        return bad("unknown experiment");
    }
    if !obj["results"].is_object() {
        return bad("results must be an object");
    }
    let summary: Summary =
        serde_json::from_value(obj["summary"].clone()).map_err(|e| Error::Config(format!("summary: {e}")))?;
    if summary.passed != summary.checks.iter().all(|c| c.passed) {
        return bad("summary verdict disagrees with its checks");
    }
    serde_json::from_value::<Metadata>(obj["metadata"].clone()).map_err(|e| Error::Config(format!("metadata: {e}")))?;
    serde_json::from_value::<ExperimentConfig>(obj["config"].clone())
        .map_err(|e| Error::Config(format!("config: {e}")))?;
    Ok(())
}

/// A rectangular table of already-rendered cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }
}

/// Shortest round-trip rendering of a float for CSV cells, identical to the JSON
/// rendering for finite values.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
