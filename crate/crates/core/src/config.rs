//! Experiment configuration.
//!
//! One JSON object per experiment:
//!
//! ```json
//! {
//!   "cycle_length": 4,
//!   "weights": {"family": "power", "parameters": {"rho": 2.0}},
//!   "horizon": 10000,
//!   "replicas": 100,
//!   "seed": 1
//! }
//! ```
//!
//! Optional keys: `name`, `initial_counts` (default all zero), `start`
//! (default 0), `window` (default 100), `tail_fraction` (default 0.5),
//! `engine` (`"discrete"` or `"timeline"`), `clock_tolerance` (timeline only;
//! omitted means untruncated lines), `output` (`{"format": "json"|"csv",
//! "path": ...}`). Unknown keys are rejected.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::CycleGraph;
use crate::weights::{WeightFamily, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Discrete,
    Timeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}, expected json or csv")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn default_window() -> usize {
    100
}

fn default_tail_fraction() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub cycle_length: usize,
    pub weights: WeightFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_counts: Option<Vec<u64>>,
    #[serde(default)]
    pub start: usize,
    pub horizon: usize,
    pub replicas: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock_tolerance: Option<f64>,
    #[serde(default)]
    pub output: OutputOptions,
}

const TOP_KEYS: &[&str] = &[
    "name",
    "cycle_length",
    "weights",
    "initial_counts",
    "start",
    "horizon",
    "replicas",
    "window",
    "tail_fraction",
    "seed",
    "engine",
    "clock_tolerance",
    "output",
];
const OUTPUT_KEYS: &[&str] = &["format", "path"];

/// One failed validation rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid JSON: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKey(Vec<String>),
    #[error("invalid config: {}", join(.0))]
    Schema(Vec<ConfigIssue>),
}

impl ConfigError {
    pub fn issues(&self) -> Vec<ConfigIssue> {
        match self {
            ConfigError::Schema(v) => v.clone(),
            ConfigError::UnknownKey(keys) => keys
                .iter()
                .map(|k| ConfigIssue {
                    field: k.clone(),
                    message: "unknown key".into(),
                })
                .collect(),
            other => vec![ConfigIssue {
                field: String::new(),
                message: other.to_string(),
            }],
        }
    }
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub horizon: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    /// A small default: `l = 4`, `W(k) = (k+1)^2`, `N = 10^4`, `R = 100`.
    pub fn minimal(seed: u64) -> Self {
        Self {
            name: None,
            cycle_length: 4,
            weights: WeightFamily::power(2.0),
            initial_counts: None,
            start: 0,
            horizon: 10_000,
            replicas: 100,
            window: default_window(),
            tail_fraction: default_tail_fraction(),
            seed,
            engine: Engine::Discrete,
            clock_tolerance: None,
            output: OutputOptions::default(),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(r) = o.replicas {
            self.replicas = r;
        }
        if let Some(h) = o.horizon {
            self.horizon = h;
        }
        if let Some(p) = &o.out {
            self.output.path = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
    }

    /// Every violated rule, not just the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut bad = |field: &str, message: String| {
            issues.push(ConfigIssue {
                field: field.into(),
                message,
            })
        };
        if CycleGraph::new(self.cycle_length).is_err() {
            bad("cycle_length", format!("must be >= 3, got {}", self.cycle_length));
        }
        if let Err(e) = self.weights.validate() {
            bad("weights", e.to_string());
        }
        if let Some(c) = &self.initial_counts {
            if c.len() != self.cycle_length {
                bad(
                    "initial_counts",
                    format!("needs one count per edge ({}), got {}", self.cycle_length, c.len()),
                );
            }
        }
        if self.start >= self.cycle_length.max(1) {
            bad("start", format!("vertex {} is not on a cycle of length {}", self.start, self.cycle_length));
        }
        if self.replicas == 0 {
            bad("replicas", "must be >= 1".into());
        }
        if self.window < 2 {
            bad("window", format!("must be >= 2, got {}", self.window));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            bad("tail_fraction", format!("must lie in (0, 1), got {}", self.tail_fraction));
        }
        if let Some(t) = self.clock_tolerance {
            if !(t.is_finite() && t > 0.0) {
                bad("clock_tolerance", format!("must be finite and > 0, got {t}"));
            }
            if self.engine != Engine::Timeline {
                bad("clock_tolerance", "only meaningful with engine \"timeline\"".into());
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Schema(issues))
        }
    }

    pub fn graph(&self) -> CycleGraph {
        CycleGraph::new(self.cycle_length).expect("validated config")
    }

    pub fn weight_function(&self) -> WeightFunction {
        WeightFunction::new(self.weights.clone()).expect("validated config")
    }

    pub fn initial(&self) -> Vec<u64> {
        self.initial_counts.clone().unwrap_or_else(|| vec![0; self.cycle_length])
    }

    /// The config without its output options, which do not change results.
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            output: OutputOptions::default(),
            ..self.clone()
        }
    }

    /// Canonical JSON (sorted keys) of [`experiment`](Self::experiment).
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self.experiment()).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Parses a config from JSON text; `origin` is only used in messages.
pub fn parse_config_str(text: &str, origin: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let Value::Object(map) = &value else {
        return Err(ConfigError::Schema(vec![ConfigIssue {
            field: String::new(),
            message: "top level must be a JSON object".into(),
        }]));
    };
    let mut unknown: Vec<String> = map.keys().filter(|k| !TOP_KEYS.contains(&k.as_str())).cloned().collect();
    if let Some(Value::Object(out)) = map.get("output") {
        unknown.extend(
            out.keys()
                .filter(|k| !OUTPUT_KEYS.contains(&k.as_str()))
                .map(|k| format!("output.{k}")),
        );
    }
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKey(unknown));
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| {
        ConfigError::Schema(vec![ConfigIssue {
            field: String::new(),
            message: e.to_string(),
        }])
    })?;
    cfg.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, overrides, then validates.
pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    if !path.exists() {
        return Err(ConfigError::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path, overrides)
}
