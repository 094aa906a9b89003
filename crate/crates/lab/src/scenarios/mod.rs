//! Scenario registry and the shared run context.

use std::path::{Path, PathBuf};

use anyhow::Result;
use contact_lab_core::flow::{IntegratorConfig, Trajectory};

use crate::config::{common_knobs, Knob, ScenarioConfig};
use crate::export;
use crate::report::RunReport;

mod bo;
mod coiso;
mod collapse;
mod energy;
mod exprop;
mod flow;

pub struct Scenario {
    pub id: &'static str,
    pub summary: &'static str,
    knobs: fn() -> Vec<Knob>,
    /// Cross-knob constraints the schema cannot express.
    validate: fn(&ScenarioConfig) -> Result<(), String>,
    run: fn(&mut Ctx) -> Result<()>,
}

impl Scenario {
    pub fn schema(&self) -> Vec<Knob> {
        let mut s = common_knobs();
        s.extend((self.knobs)());
        s
    }

    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<(), String> {
        (self.validate)(cfg)
    }
}

fn no_constraints(_: &ScenarioConfig) -> Result<(), String> {
    Ok(())
}

pub static SCENARIOS: [Scenario; 10] = [
    Scenario { id: "flow-verify", summary: "contact flows: pullback residual and conformal factor", knobs: flow::knobs, validate: no_constraints, run: flow::run },
    Scenario { id: "coiso-sweep", summary: "coisotropy verdicts along a tilt family and on random germs", knobs: coiso::knobs, validate: no_constraints, run: coiso::run },
    Scenario { id: "energy-cutoff", summary: "disjunction energy of the cutoff Hamiltonians against 2e^(3M)/k", knobs: energy::knobs, validate: no_constraints, run: energy::run },
    Scenario { id: "collapse-square", summary: "square collapse flow against its closed form and the envelope bounds", knobs: collapse::square_knobs, validate: no_constraints, run: collapse::square },
    Scenario { id: "collapse-wall", summary: "wall map on the z-axis and its tangency order", knobs: collapse::wall_knobs, validate: no_constraints, run: collapse::wall },
    Scenario { id: "collapse-approximants", summary: "smooth approximants and conformal factor convergence", knobs: collapse::approximant_knobs, validate: collapse::validate_approximants, run: collapse::approximants },
    Scenario { id: "collapse-ratios", summary: "contact volume ratios of shrinking boxes at the zero section", knobs: collapse::ratio_knobs, validate: collapse::validate_ratios, run: collapse::ratios },
    Scenario { id: "bo-build", summary: "graph-action construction: stage parameters and bounds", knobs: bo::build_knobs, validate: bo::validate, run: bo::build },
    Scenario { id: "bo-graph", summary: "graph-action error, Cauchy and conformal checks, image of the axis", knobs: bo::graph_knobs, validate: bo::validate, run: bo::graph },
    Scenario { id: "exprop-compose", summary: "graph action composed with an inverse collapse flow", knobs: exprop::knobs, validate: no_constraints, run: exprop::run },
];

pub fn find(id: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.id == id)
}

pub fn ids() -> Vec<&'static str> {
    SCENARIOS.iter().map(|s| s.id).collect()
}

pub struct Ctx<'a> {
    pub cfg: &'a ScenarioConfig,
    pub out: PathBuf,
    pub golden: bool,
    pub report: RunReport,
}

impl Ctx<'_> {
    /// The fixed-step rk4 golden integrator when requested, `default` otherwise.
    pub fn integrator(&self, default: IntegratorConfig) -> IntegratorConfig {
        if self.golden {
            IntegratorConfig { method: IntegratorConfig::golden().method, ..default }
        } else {
            default
        }
    }

    fn artifact(&mut self, name: &str) -> PathBuf {
        self.report.artifacts.push(name.to_string());
        self.out.join(name)
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        let path = self.artifact(name);
        export::write_table(&path, &header, rows)
    }

    pub fn table_owned(&mut self, name: &str, header: Vec<String>, rows: &[Vec<f64>]) -> Result<()> {
        let path = self.artifact(name);
        export::write_table(&path, &header, rows)
    }

    pub fn trajectory(&mut self, name: &str, n: usize, tr: &Trajectory) -> Result<()> {
        let path = self.artifact(name);
        export::write_trajectory(&path, n, tr)
    }
}

/// Runs `s` and writes its artifacts and report into `out`. Numerical errors become
/// a failing check named after the scenario.
pub fn run_scenario(s: &Scenario, cfg: &ScenarioConfig, out: &Path, golden: bool) -> Result<RunReport> {
    std::fs::create_dir_all(out)?;
    let mut ctx = Ctx { cfg, out: out.to_path_buf(), golden, report: RunReport::new(cfg, golden) };
    if let Err(e) = (s.run)(&mut ctx) {
        ctx.report.verdict(format!("{} completed", s.id), false, format!("{e:#}"));
    }
    ctx.report.write(out)?;
    Ok(ctx.report)
}

/// One line per scenario: id, summary and default configuration.
pub fn listing() -> String {
    let mut s = String::new();
    for sc in &SCENARIOS {
        let defaults: Vec<String> = sc.schema().iter().map(|k| format!("{}={}", k.key, k.default)).collect();
        s.push_str(&format!("{:<22} {}  [{}]\n", sc.id, sc.summary, defaults.join(" ")));
    }
    s
}

/// JSON array of `{id, summary, defaults}` objects.
pub fn listing_json() -> String {
    let items: Vec<serde_json::Value> = SCENARIOS
        .iter()
        .map(|sc| {
            let defaults: serde_json::Map<String, serde_json::Value> =
                sc.schema().iter().map(|k| (k.key.to_string(), serde_json::to_value(&k.default).unwrap())).collect();
            serde_json::json!({ "id": sc.id, "summary": sc.summary, "defaults": defaults })
        })
        .collect();
    serde_json::to_string_pretty(&items).unwrap()
}
