//! Run reports, rendered as plain text and JSON from the same record.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::{ScenarioConfig, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Equal,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
            Relation::Equal => "==",
        }
    }

    fn holds(&self, a: f64, b: f64) -> bool {
        match self {
            Relation::AtMost => a <= b,
            Relation::Below => a < b,
            Relation::AtLeast => a >= b,
            Relation::Above => a > b,
            Relation::Equal => a == b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub contact_lab: &'static str,
    pub rustc_target: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub golden: bool,
    pub versions: Versions,
    pub config: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// Informational lines that are not checks.
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    pub failures: usize,
}

impl RunReport {
    pub fn new(cfg: &ScenarioConfig, golden: bool) -> Self {
        Self {
            scenario: cfg.scenario.clone(),
            seed: cfg.seed(),
            golden,
            versions: Versions { contact_lab: env!("CARGO_PKG_VERSION"), rustc_target: std::env::consts::ARCH },
            config: cfg.values.clone(),
            checks: Vec::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
            failures: 0,
        }
    }

    fn push(&mut self, c: Check) {
        self.failures += !c.pass as usize;
        self.checks.push(c);
    }

    /// A comparison check; non-finite measurements fail.
    pub fn compare(&mut self, name: impl Into<String>, measured: f64, relation: Relation, bound: f64, detail: impl Into<String>) {
        let pass = measured.is_finite() && relation.holds(measured, bound);
        self.push(Check { name: name.into(), pass, measured: Some(measured), relation: Some(relation), bound: Some(bound), detail: detail.into() });
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.push(Check { name: name.into(), pass, measured: None, relation: None, bound: None, detail: detail.into() });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("scenario {}\nseed {}\ngolden {}\nversion {}\n", self.scenario, self.seed, self.golden, self.versions.contact_lab);
        s.push_str("config\n");
        for (k, v) in &self.config {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        s.push_str("checks\n");
        for c in &self.checks {
            s.push_str(&format!("  {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name));
            if let (Some(m), Some(r), Some(b)) = (c.measured, c.relation, c.bound) {
                s.push_str(&format!(": {m:e} {} {b:e}", r.symbol()));
            }
            if !c.detail.is_empty() {
                s.push_str(&format!(" ({})", c.detail));
            }
            s.push('\n');
        }
        if !self.notes.is_empty() {
            s.push_str("notes\n");
            for n in &self.notes {
                s.push_str(&format!("  {n}\n"));
            }
        }
        s.push_str("artifacts\n");
        for a in &self.artifacts {
            s.push_str(&format!("  {a}\n"));
        }
        s.push_str(&format!("failures {}\n", self.failures));
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.txt` and `report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join("report.txt"), self.to_text())?;
        std::fs::write(dir.join("report.json"), self.to_json() + "\n")
    }
}
