//! Flat typed key-value configuration, validated against a per-scenario schema.
//!
//! Files use TOML syntax restricted to top-level scalars and arrays:
//!
//! ```text
//! n = 1
//! t = 0.5
//! k_list = [1, 2, 4]
//! preset = "fourfinite"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    IntList(Vec<i64>),
    FloatList(Vec<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::IntList(v) => write!(f, "[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")),
            Value::FloatList(v) => write!(f, "[{}]", v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Bool,
    Int { min: i64, max: i64 },
    Float { min: f64, max: f64 },
    Str { choices: &'static [&'static str] },
    /// Free-form string, e.g. a file path; empty means unset.
    Text,
    IntList { min: i64, max: i64 },
    FloatList { min: f64, max: f64 },
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Bool => "bool".into(),
            Kind::Int { min, max } => format!("int in [{min}, {max}]"),
            Kind::Float { min, max } => format!("float in [{min:e}, {max:e}]"),
            Kind::Str { choices } => format!("one of {}", choices.join("|")),
            Kind::Text => "string".into(),
            Kind::IntList { min, max } => format!("non-empty list of ints in [{min}, {max}]"),
            Kind::FloatList { min, max } => format!("non-empty list of floats in [{min:e}, {max:e}]"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Knob {
    pub key: &'static str,
    pub kind: Kind,
    pub default: Value,
    pub help: &'static str,
}

impl Knob {
    pub fn new(key: &'static str, kind: Kind, default: Value, help: &'static str) -> Self {
        Self { key, kind, default, help }
    }
}

/// Keys accepted by every scenario.
pub fn common_knobs() -> Vec<Knob> {
    vec![Knob::new("seed", Kind::Int { min: 0, max: i64::MAX }, Value::Int(0), "random seed")]
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Human-readable schema listing, one key per line.
pub fn schema_dump(schema: &[Knob]) -> String {
    let mut s = String::new();
    for k in schema {
        s.push_str(&format!("  {} = {}    # {}; {}\n", k.key, k.default, k.kind.describe(), k.help));
    }
    s
}

/// Default configuration as a file that parses back to the same values.
pub fn default_file(schema: &[Knob]) -> String {
    schema.iter().map(|k| format!("{} = {}\n", k.key, k.default)).collect()
}

fn convert(key: &str, kind: Kind, v: &toml::Value) -> Result<Value, ConfigError> {
    let bad = || ConfigError(format!("`{key}`: expected {}, found {v}", kind.describe()));
    let float = |v: &toml::Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
    let out = match kind {
        Kind::Bool => Value::Bool(v.as_bool().ok_or_else(bad)?),
        Kind::Int { min, max } => {
            let i = v.as_integer().ok_or_else(bad)?;
            if i < min || i > max {
                return Err(bad());
            }
            Value::Int(i)
        }
        Kind::Float { min, max } => {
            let x = float(v).ok_or_else(bad)?;
            if !(x >= min && x <= max) {
                return Err(bad());
            }
            Value::Float(x)
        }
        Kind::Str { choices } => {
            let s = v.as_str().ok_or_else(bad)?;
            if !choices.contains(&s) {
                return Err(bad());
            }
            Value::Str(s.into())
        }
        Kind::Text => Value::Str(v.as_str().ok_or_else(bad)?.into()),
        Kind::IntList { min, max } => {
            let a = v.as_array().ok_or_else(bad)?;
            let xs: Option<Vec<i64>> = a.iter().map(|e| e.as_integer()).collect();
            let xs = xs.ok_or_else(bad)?;
            if xs.is_empty() || xs.iter().any(|&x| x < min || x > max) {
                return Err(bad());
            }
            Value::IntList(xs)
        }
        Kind::FloatList { min, max } => {
            let a = v.as_array().ok_or_else(bad)?;
            let xs: Option<Vec<f64>> = a.iter().map(float).collect();
            let xs = xs.ok_or_else(bad)?;
            if xs.is_empty() || xs.iter().any(|&x| !(x >= min && x <= max)) {
                return Err(bad());
            }
            Value::FloatList(xs)
        }
    };
    Ok(out)
}

/// Validated knob values for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub values: BTreeMap<String, Value>,
}

impl ScenarioConfig {
    /// Parses `text` against `schema`, filling defaults for missing keys.
    pub fn parse(scenario: &str, schema: &[Knob], text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(format!("config syntax: {}", e.message())))?;
        let mut values = BTreeMap::new();
        for (key, v) in &table {
            let Some(knob) = schema.iter().find(|k| k.key == key) else {
                return err(format!("unknown key `{key}` for scenario {scenario}"));
            };
            if v.is_table() || v.as_array().is_some_and(|a| a.iter().any(|e| e.is_table() || e.is_array())) {
                return err(format!("`{key}`: nested values are not allowed"));
            }
            values.insert(key.clone(), convert(key, knob.kind, v)?);
        }
        for k in schema {
            values.entry(k.key.to_string()).or_insert_with(|| k.default.clone());
        }
        Ok(Self { scenario: scenario.into(), values })
    }

    pub fn load(scenario: &str, schema: &[Knob], path: Option<&Path>) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse(scenario, schema, &text)
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.values.insert(key.into(), v);
    }

    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("knob `{key}` missing from schema"))
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(i) => *i,
            v => panic!("knob `{key}` is not an int: {v}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            Value::Int(i) => *i as f64,
            v => panic!("knob `{key}` is not a float: {v}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(s) => s,
            v => panic!("knob `{key}` is not a string: {v}"),
        }
    }

    pub fn ints(&self, key: &str) -> &[i64] {
        match self.get(key) {
            Value::IntList(v) => v,
            v => panic!("knob `{key}` is not an int list: {v}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(v) => v,
            v => panic!("knob `{key}` is not a float list: {v}"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("seed") as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<Knob> {
        let mut s = common_knobs();
        s.push(Knob::new("t", Kind::Float { min: 0.0, max: 10.0 }, Value::Float(0.5), "time"));
        s.push(Knob::new("ks", Kind::IntList { min: 1, max: 64 }, Value::IntList(vec![1, 2]), "k values"));
        s.push(Knob::new("preset", Kind::Str { choices: &["a", "b"] }, Value::Str("a".into()), "preset"));
        s
    }

    #[test]
    fn defaults_round_trip() {
        let s = schema();
        let c = ScenarioConfig::parse("x", &s, &default_file(&s)).unwrap();
        assert_eq!(c, ScenarioConfig::parse("x", &s, "").unwrap());
        assert_eq!(c.ints("ks"), &[1, 2]);
    }

    #[test]
    fn integers_widen_to_floats() {
        let c = ScenarioConfig::parse("x", &schema(), "t = 2").unwrap();
        assert_eq!(c.float("t"), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        let s = schema();
        for text in ["ks = []", "t = -1.0", "preset = \"c\"", "nope = 1", "t = \"fast\"", "[section]\nt = 1.0", "ks = [1, 2.5]"] {
            assert!(ScenarioConfig::parse("x", &s, text).is_err(), "{text}");
        }
    }
}
