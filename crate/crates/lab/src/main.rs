use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use contact_lab::config::{schema_dump, ScenarioConfig, Value};
use contact_lab::scenarios::{find, ids, listing, listing_json, run_scenario};
use contact_lab::OUT_ENV;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Reproducible numerical experiments in the standard contact structure.
///
/// `contact-lab list` prints the scenarios; `contact-lab list <id>` prints the
/// configuration schema of one of them.
#[derive(Debug, Parser)]
#[command(name = "contact-lab", version)]
struct Cli {
    /// Scenario id, or `list`.
    scenario: Option<String>,
    /// With `list`: scenario whose schema to print.
    id: Option<String>,
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $CONTACT_LAB_OUT, else contact-lab-out/<scenario>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed-step rk4 integration for bit-reproducible outputs.
    #[arg(long)]
    golden: bool,
    /// Listing format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

const USAGE: u8 = 2;

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE)
}

fn unknown(id: &str) -> ExitCode {
    usage(&format!("unknown scenario `{id}`; valid ids: {}", ids().join(", ")))
}

fn list(id: Option<&str>, format: Format) -> ExitCode {
    match (id, format) {
        (None, Format::Text) => print!("{}", listing()),
        (None, Format::Json) => println!("{}", listing_json()),
        (Some(id), _) => {
            let Some(s) = find(id) else { return unknown(id) };
            match format {
                Format::Text => print!("{}\n{}", s.summary, schema_dump(&s.schema())),
                Format::Json => {
                    let m: serde_json::Map<String, serde_json::Value> =
                        s.schema().iter().map(|k| (k.key.to_string(), serde_json::to_value(&k.default).unwrap())).collect();
                    println!("{}", serde_json::to_string_pretty(&m).unwrap());
                }
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(id) = cli.scenario.as_deref() else {
        return list(None, cli.format);
    };
    if id == "list" {
        return list(cli.id.as_deref(), cli.format);
    }
    if let Some(extra) = &cli.id {
        return usage(&format!("unexpected argument `{extra}`"));
    }
    let Some(s) = find(id) else { return unknown(id) };
    let schema = s.schema();
    let mut cfg = match ScenarioConfig::load(id, &schema, cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return usage(&format!("{e}\nschema for {id}:\n{}", schema_dump(&schema))),
    };
    if let Some(seed) = cli.seed {
        if seed > i64::MAX as u64 {
            return usage("seed out of range");
        }
        cfg.set("seed", Value::Int(seed as i64));
    }
    if let Err(e) = s.validate(&cfg) {
        return usage(&format!("{e}\nschema for {id}:\n{}", schema_dump(&schema)));
    }
    let out = cli
        .out
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("contact-lab-out").join(id));
    let report = match run_scenario(s, &cfg, &out, cli.golden) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    print!("{}", report.to_text());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!("failed check: {}", c.name);
        }
        ExitCode::from(1)
    }
}
