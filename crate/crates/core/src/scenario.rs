//! Scenario files.
//!
//! A scenario file is TOML: an optional `preset`, an optional `[output]`
//! table, and any subset of the [`SimConfig`] fields at top level. Fields not
//! given are taken from the preset; unknown keys are rejected.
//!
//! ```toml
//! preset = "attack1_comp"
//! seed = 3
//!
//! [attack]
//! spike_amplitude = 1.5
//!
//! [output]
//! trace = "out/attack1.csv"
//! metrics = "out/attack1.toml"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::attack::AttackSpec;
use crate::error::{AccError, AccResult};
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Nominal,
    Attack1Nocomp,
    Attack1Comp,
    Attack2Nocomp,
    Attack2Comp,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Nominal,
        Preset::Attack1Nocomp,
        Preset::Attack1Comp,
        Preset::Attack2Nocomp,
        Preset::Attack2Comp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Nominal => "nominal",
            Preset::Attack1Nocomp => "attack1_nocomp",
            Preset::Attack1Comp => "attack1_comp",
            Preset::Attack2Nocomp => "attack2_nocomp",
            Preset::Attack2Comp => "attack2_comp",
        }
    }

    /// Full configuration for the preset. The reference-bias presets run to
    /// `t_attack + bias_ramp_time` so the erosion completes.
    pub fn config(&self) -> SimConfig {
        let mut cfg = SimConfig::default();
        match self {
            Preset::Nominal => {}
            Preset::Attack1Nocomp | Preset::Attack1Comp => {
                cfg.attack = AttackSpec::spike();
            }
            Preset::Attack2Nocomp | Preset::Attack2Comp => {
                cfg.attack = AttackSpec::reference_bias();
                cfg.duration = cfg.attack.t_attack + cfg.attack.bias_ramp_time;
            }
        }
        cfg.ids.compensation = matches!(self, Preset::Nominal | Preset::Attack1Comp | Preset::Attack2Comp);
        cfg
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = AccError;

    fn from_str(s: &str) -> AccResult<Self> {
        Preset::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.as_str()).collect();
            AccError::Config(format!("unknown preset '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub preset: Preset,
    pub output: OutputPaths,
    pub config: SimConfig,
}

/// A `path = value` override, e.g. `attack.spike_amplitude=1.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: String,
    pub value: Value,
}

impl FromStr for Override {
    type Err = AccError;

    fn from_str(s: &str) -> AccResult<Self> {
        let (path, raw) = s
            .split_once('=')
            .ok_or_else(|| AccError::Config(format!("override '{s}' is not of the form key=value")))?;
        Ok(Override {
            path: path.trim().to_string(),
            value: parse_value(raw.trim())?,
        })
    }
}

/// Parses a bare TOML value; unquoted words fall back to strings.
pub fn parse_value(raw: &str) -> AccResult<Value> {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => Ok(t.remove("v").unwrap_or(Value::String(raw.to_string()))),
        Err(_) if !raw.is_empty() && raw.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') => {
            Ok(Value::String(raw.to_string()))
        }
        Err(e) => Err(AccError::Config(format!("cannot parse value '{raw}': {e}"))),
    }
}

fn config_table(cfg: &SimConfig) -> AccResult<Table> {
    match Value::try_from(cfg).map_err(|e| AccError::Config(e.to_string()))? {
        Value::Table(t) => Ok(t),
        _ => Err(AccError::Config("configuration did not serialise to a table".into())),
    }
}

fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(dst)), Value::Table(src)) => merge(dst, src),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Every dotted path to a non-table value, for override resolution.
fn leaf_paths(table: &Table, prefix: &str, out: &mut Vec<String>) {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            Value::Table(t) => leaf_paths(t, &path, out),
            _ => out.push(path),
        }
    }
}

/// Resolves a dotted path or a unique leaf name against the config layout.
pub fn resolve_parameter(name: &str) -> AccResult<String> {
    let table = config_table(&SimConfig::default())?;
    let mut paths = Vec::new();
    leaf_paths(&table, "", &mut paths);
    if paths.iter().any(|p| p == name) {
        return Ok(name.to_string());
    }
    let suffix = format!(".{name}");
    let matches: Vec<&String> = paths.iter().filter(|p| p.ends_with(&suffix)).collect();
    match matches.as_slice() {
        [one] => Ok((*one).clone()),
        [] => Err(AccError::Config(format!("unknown parameter '{name}'"))),
        many => Err(AccError::Config(format!(
            "parameter '{name}' is ambiguous: {}",
            many.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn set_path(table: &mut Table, path: &str, value: Value) -> AccResult<()> {
    let mut parts = path.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            if !cur.contains_key(part) {
                return Err(AccError::Config(format!("unknown parameter '{path}'")));
            }
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        cur = match cur.get_mut(part) {
            Some(Value::Table(t)) => t,
            _ => return Err(AccError::Config(format!("unknown parameter '{path}'"))),
        };
    }
    Err(AccError::Config("empty parameter path".into()))
}

/// Integer-valued fields accept whole floats from sweeps (`n_consec=2.0`).
fn coerce_like(existing: Option<&Value>, value: Value) -> Value {
    match (existing, &value) {
        (Some(Value::Integer(_)), Value::Float(f)) if f.fract() == 0.0 => Value::Integer(*f as i64),
        (Some(Value::Float(_)), Value::Integer(i)) => Value::Float(*i as f64),
        _ => value,
    }
}

fn lookup<'a>(table: &'a Table, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut cur = table.get(parts.next()?)?;
    for part in parts {
        cur = cur.as_table()?.get(part)?;
    }
    Some(cur)
}

impl ScenarioFile {
    pub fn from_preset(preset: Preset) -> Self {
        Self {
            preset,
            output: OutputPaths::default(),
            config: preset.config(),
        }
    }

    pub fn parse(text: &str) -> AccResult<Self> {
        Self::parse_with(text, None, &[])
    }

    /// Parses `text`; `preset` (if given) replaces the file's preset, and
    /// `overrides` are applied on top of everything else.
    pub fn parse_with(text: &str, preset: Option<Preset>, overrides: &[Override]) -> AccResult<Self> {
        let mut doc: Table = text
            .parse()
            .map_err(|e: toml::de::Error| AccError::Config(e.message().to_string()))?;
        let file_preset = match doc.remove("preset") {
            Some(Value::String(s)) => Some(s.parse::<Preset>()?),
            Some(other) => {
                return Err(AccError::Config(format!("preset must be a string, got {other}")));
            }
            None => None,
        };
        let preset = preset.or(file_preset).unwrap_or_default();
        let output = match doc.remove("output") {
            Some(v) => OutputPaths::deserialize(v).map_err(|e| AccError::Config(e.to_string()))?,
            None => OutputPaths::default(),
        };

        let mut merged = config_table(&preset.config())?;
        merge(&mut merged, doc);
        for ov in overrides {
            let path = resolve_parameter(&ov.path)?;
            let value = coerce_like(lookup(&merged, &path), ov.value.clone());
            set_path(&mut merged, &path, value)?;
        }
        let config = SimConfig::deserialize(Value::Table(merged)).map_err(|e| AccError::Config(e.to_string()))?;
        config.validate().map_err(|e| AccError::Config(e.to_string()))?;
        Ok(Self { preset, output, config })
    }

    pub fn load(path: &Path, preset: Option<Preset>, overrides: &[Override]) -> AccResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AccError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_with(&text, preset, overrides)
    }

    /// Fully resolved document; parsing it back yields an equal value.
    pub fn to_toml(&self) -> AccResult<String> {
        let mut table = Table::new();
        table.insert("preset".into(), Value::String(self.preset.as_str().into()));
        for (k, v) in config_table(&self.config)? {
            table.insert(k, v);
        }
        let output = Value::try_from(&self.output).map_err(|e| AccError::Config(e.to_string()))?;
        if output.as_table().is_some_and(|t| !t.is_empty()) {
            table.insert("output".into(), output);
        }
        toml::to_string(&table).map_err(|e| AccError::Config(e.to_string()))
    }
}
