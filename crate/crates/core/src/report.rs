//! Stable result files.
//!
//! JSON output has sorted keys, two-space indentation and every non-integer
//! number printed as `{:.11e}` (12 significant digits), so a fixed result
//! always produces the same bytes and re-emitting a parsed file reproduces it.
//!
//! CSV aggregates of an experiment use the header [`EXPERIMENT_CSV_HEADER`].

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::config::Format;
use crate::harness::ExperimentResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot serialize result: {0}")]
    Serialize(String),
}

/// A float at 12 significant digits; non-finite values become `null`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "null".to_string()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                write!(out, "{n}").expect("string write");
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                out.push_str(if k == 0 { "\n" } else { ",\n" });
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                out.push_str(if k == 0 { "\n" } else { ",\n" });
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(out, &map[key], indent + 2);
            }
            out.push('\n');
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Stable JSON text of any serializable value, newline terminated.
pub fn to_stable_json<T: Serialize + ?Sized>(value: &T) -> Result<String, ReportError> {
    let v = serde_json::to_value(value).map_err(|e| ReportError::Serialize(e.to_string()))?;
    Ok(stable_json_value(&v))
}

pub fn stable_json_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Empty cell for `None`.
pub fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn float_cell(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub const EXPERIMENT_CSV_HEADER: &[&str] = &[
    "name",
    "cycle_length",
    "engine",
    "horizon",
    "replicas",
    "window",
    "tail_fraction",
    "seed",
    "attracted",
    "attracted_fraction",
    "attracted_se",
    "branching",
    "onset_mean",
    "onset_median",
    "truncated",
    "parity_residual_max",
    "final_kappa_abs_mean",
    "config_hash",
];

/// One aggregate row per result.
pub fn experiment_table(results: &[&ExperimentResult]) -> Table {
    let mut t = Table::new(EXPERIMENT_CSV_HEADER);
    for r in results {
        let c = &r.config;
        let a = &r.aggregate;
        let engine = serde_json::to_value(c.engine).ok().and_then(|v| v.as_str().map(str::to_string));
        t.push(vec![
            c.name.clone().unwrap_or_default(),
            c.cycle_length.to_string(),
            engine.unwrap_or_default(),
            c.horizon.to_string(),
            c.replicas.to_string(),
            c.window.to_string(),
            format_float(c.tail_fraction),
            c.seed.to_string(),
            a.attracted.to_string(),
            format_float(a.attracted_fraction),
            format_float(a.attracted_se),
            a.branching.to_string(),
            float_cell(a.onset_mean),
            float_cell(a.onset_median),
            a.truncated.to_string(),
            float_cell(a.parity_residual_max),
            format_float(a.final_kappa_abs_mean),
            r.provenance.config_hash.clone(),
        ]);
    }
    t
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, text).map_err(io_err)
}

/// Writes an experiment result as stable JSON or as its aggregate CSV row.
pub fn emit(result: &ExperimentResult, format: Format, path: &Path) -> Result<(), ReportError> {
    let text = match format {
        Format::Json => to_stable_json(result)?,
        Format::Csv => experiment_table(&[result]).to_csv(),
    };
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::harness::run_experiment;
    use serde_json::json;

    #[test]
    fn floats_have_twelve_digits() {
        assert_eq!(format_float(0.1), "1.00000000000e-1");
        assert_eq!(format_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_float(f64::NAN), "null");
        let s = stable_json_value(&json!({"b": 1, "a": [0.5, null, "x"], "c": {}}));
        assert_eq!(s, "{\n  \"a\": [\n    5.00000000000e-1,\n    null,\n    \"x\"\n  ],\n  \"b\": 1,\n  \"c\": {}\n}\n");
    }

    #[test]
    fn emit_is_stable_and_reparses() {
        let mut cfg = ExperimentConfig::minimal(9);
        cfg.horizon = 500;
        cfg.replicas = 5;
        let r = run_experiment(&cfg, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("sub/b.json");
        emit(&r, Format::Json, &a).unwrap();
        emit(&r, Format::Json, &b).unwrap();
        let ta = fs::read_to_string(&a).unwrap();
        assert_eq!(ta, fs::read_to_string(&b).unwrap());
        let parsed: Value = serde_json::from_str(&ta).unwrap();
        assert_eq!(stable_json_value(&parsed), ta);
        let back: ExperimentResult = serde_json::from_str(&ta).unwrap();
        assert_eq!(back.aggregate.attracted, r.aggregate.attracted);
        assert_eq!(back.config, r.config);

        let c = dir.path().join("a.csv");
        emit(&r, Format::Csv, &c).unwrap();
        let csv = fs::read_to_string(&c).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), EXPERIMENT_CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap().split(',').count(), EXPERIMENT_CSV_HEADER.len());
    }

    #[test]
    fn io_error_has_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f");
        fs::write(&file, "x").unwrap();
        let err = write_text(&file.join("child.json"), "{}").unwrap_err();
        assert!(err.to_string().contains("child.json"));
    }
}
