//! Machine- and human-readable reports.
//!
//! Reports are schema-versioned and byte-stable for identical inputs and
//! seed: exact rationals render as `p/q` strings, floats as decimals with
//! 12 significant digits, and JSON maps are ordered. Timing is opt-in so
//! the default output stays deterministic.

use serde::Serialize;
use serde_json::{json, Value};

use crate::floatmat::FMat;
use crate::matrix::Mat;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Clone, Debug)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioEcho>,
    pub analyses: Vec<AnalysisReport>,
    pub all_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<Vec<TimingEntry>>,
}

#[derive(Serialize, Clone, Debug)]
pub struct TimingEntry {
    pub name: String,
    pub millis: u128,
}

#[derive(Serialize, Clone, Debug)]
pub struct ScenarioEcho {
    pub masses: Vec<String>,
    pub analyses: Vec<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct AnalysisReport {
    pub name: String,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
    pub data: Value,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub details: String,
}

impl Verdict {
    pub fn new(check: impl Into<String>, passed: bool, details: impl Into<String>) -> Self {
        Verdict { check: check.into(), passed, details: details.into() }
    }
}

impl Report {
    pub fn new(command: &str, seed: u64, scenario: Option<ScenarioEcho>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            seed,
            scenario,
            analyses: Vec::new(),
            all_passed: true,
            timing_ms: None,
        }
    }

    pub fn push(&mut self, analysis: AnalysisReport) {
        self.all_passed &= analysis.passed;
        self.analyses.push(analysis);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "framekit report (schema {}) command={} seed={}\n",
            self.schema_version, self.command, self.seed
        ));
        if let Some(echo) = &self.scenario {
            out.push_str(&format!(
                "scenario: masses = [{}], analyses = [{}]\n",
                echo.masses.join(", "),
                echo.analyses.join(", ")
            ));
        }
        for a in &self.analyses {
            out.push_str(&format!(
                "== {} : {}\n",
                a.name,
                if a.passed { "PASS" } else { "FAIL" }
            ));
            for v in &a.verdicts {
                out.push_str(&format!(
                    "  [{}] {}{}\n",
                    if v.passed { "ok" } else { "FAIL" },
                    v.check,
                    if v.details.is_empty() {
                        String::new()
                    } else {
                        format!(" -- {}", v.details)
                    }
                ));
            }
            if !a.data.is_null() {
                let rendered = serde_json::to_string_pretty(&a.data).unwrap_or_default();
                for line in rendered.lines() {
                    out.push_str("    ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
        if let Some(timing) = &self.timing_ms {
            for t in timing {
                out.push_str(&format!("timing {}: {} ms\n", t.name, t.millis));
            }
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.all_passed { "ALL PASS" } else { "FAILURES PRESENT" }
        ));
        out
    }
}

/// 12 significant digits, the float rendering contract of the report.
pub fn format_f64(x: f64) -> String {
    format!("{x:.11e}")
}

/// Exact matrix as rows of `p/q` strings.
pub fn mat_to_json(m: &Mat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                m.row(i)
                    .iter()
                    .map(|s| Value::String(s.to_string()))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

/// Float matrix with the 12-significant-digit rendering.
pub fn fmat_to_json(m: &FMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| Value::String(format_f64(m[(i, j)])))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

/// A verdict list summarized into an analysis block.
pub fn analysis(name: &str, verdicts: Vec<Verdict>, data: Value) -> AnalysisReport {
    let passed = verdicts.iter().all(|v| v.passed);
    AnalysisReport { name: name.to_string(), passed, verdicts, data }
}

/// Helper for an empty data block.
pub fn no_data() -> Value {
    json!(null)
}
