//! Experiment reports: one CSV row per grid point plus a JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use stit_core::json::{format_g17, to_string, to_string_pretty};

use crate::error::Result;
use crate::stats::{CovGap, EstimateWithCI, KSResult};

/// KS acceptance threshold.
pub const KS_ALPHA: f64 = 0.005;

/// One line of a report. `pass` is `None` for rows that are informational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub param: Option<f64>,
    pub n: usize,
    pub estimate: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub target: Option<f64>,
    pub sigma: Option<f64>,
    pub p_value: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    pub fn info(label: impl Into<String>, param: Option<f64>, n: usize, estimate: f64) -> Self {
        Self {
            label: label.into(),
            param,
            n,
            estimate,
            ci_lo: None,
            ci_hi: None,
            target: None,
            sigma: None,
            p_value: None,
            pass: None,
        }
    }

    pub fn check(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    pub fn target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    /// Empirical frequency with its Wilson interval.
    pub fn estimate(label: impl Into<String>, param: Option<f64>, e: &EstimateWithCI) -> Self {
        let mut row = Self::info(label, param, e.n, e.p_hat);
        row.ci_lo = Some(e.ci_lo);
        row.ci_hi = Some(e.ci_hi);
        row
    }

    /// Two-sided binomial comparison: `|p̂ - target| <= k σ(target)`.
    pub fn binomial(label: impl Into<String>, param: Option<f64>, e: &EstimateWithCI, target: f64, k: f64) -> Self {
        Self::estimate(label, param, e)
            .target(target)
            .sigma(e.sigma_at(target))
            .check(e.within(target, k))
    }

    /// KS row passing iff `p > KS_ALPHA`.
    pub fn ks(label: impl Into<String>, r: &KSResult) -> Self {
        Self::info(label, None, r.n1.min(r.n2), r.statistic)
            .p_value(r.p_value)
            .check(r.p_value > KS_ALPHA)
    }

    pub fn gap(label: impl Into<String>, param: Option<f64>, g: &CovGap) -> Self {
        Self::info(label, param, g.n, g.gap).sigma(g.sigma)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    /// Resolved configuration including `n_scale`.
    pub config: Value,
    pub config_hash: String,
    pub seed: u64,
    pub pass: bool,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

/// SHA-256 of the canonical compact JSON of `config`, hex encoded.
pub fn config_hash(config: &Value) -> String {
    let canonical = to_string(config).expect("JSON values always serialize");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(format_g17).unwrap_or_default()
}

impl Report {
    pub fn new(experiment: &str, config: Value, seed: u64, outcome: Outcome) -> Self {
        let pass = outcome.rows.iter().all(|r| r.pass != Some(false));
        Self {
            experiment: experiment.to_string(),
            config_hash: config_hash(&config),
            config,
            seed,
            pass,
            rows: outcome.rows,
            notes: outcome.notes,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn summary(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "pass": self.pass,
            "notes": self.notes,
        })
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "experiment",
            "row",
            "param",
            "n",
            "estimate",
            "ci_lo",
            "ci_hi",
            "target",
            "sigma",
            "p_value",
            "verdict",
        ])?;
        for r in &self.rows {
            let verdict = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            };
            w.write_record([
                self.experiment.clone(),
                r.label.clone(),
                cell(r.param),
                r.n.to_string(),
                format_g17(r.estimate),
                cell(r.ci_lo),
                cell(r.ci_hi),
                cell(r.target),
                cell(r.sigma),
                cell(r.p_value),
                verdict.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
    }

    /// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        fs::write(&csv_path, self.csv()?)?;
        let mut summary = to_string_pretty(&self.summary()).expect("JSON values always serialize");
        summary.push('\n');
        fs::write(&json_path, summary)?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_key_order_free() {
        let a: Value = serde_json::from_str(r#"{"t":0.25,"n":100}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"n":100,"t":0.25}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        let c: Value = serde_json::from_str(r#"{"n":101,"t":0.25}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn verdict_ignores_info_rows() {
        let mut o = Outcome::default();
        o.push(Row::info("a", None, 10, 0.5));
        o.push(Row::info("b", Some(1.0), 10, 0.5).check(true));
        let r = Report::new("x", json!({}), 1, o.clone());
        assert!(r.pass);
        o.push(Row::info("c", None, 10, 0.5).check(false));
        assert!(!Report::new("x", json!({}), 1, o).pass);
    }

    #[test]
    fn csv_layout() {
        let mut o = Outcome::default();
        let e = EstimateWithCI::from_count(37, 100, 3);
        o.push(Row::binomial("survival", Some(0.25), &e, (-1.0f64).exp(), 4.0));
        let r = Report::new("first-split", json!({"n": 100}), 3, o);
        let csv = r.csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("experiment,row,param,n,estimate"));
        assert!(lines[1].starts_with("first-split,survival,0.25,100,0.37,"));
        assert!(lines[1].ends_with(",,PASS"));
    }
}
