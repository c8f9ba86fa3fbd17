//! JSON config loading: file, then `--set` overrides, then typed parsing
//! with the offending JSON path in every error.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

/// Reads `path` (or starts from `{}`), applies `key.path=value` overrides
/// and, when given, writes `seed` at each of `seed_paths`.
pub fn load_value(path: Option<&Path>, sets: &[String], seed: Option<u64>, seed_paths: &[&str]) -> Result<Value> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !value.is_object() {
        return Err(CliError::config("config root must be a JSON object"));
    }
    for s in sets {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects path=value, got {s:?}")))?;
        // Anything that is not valid JSON is taken as a string.
        let v = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut value, key, v)?;
    }
    if let Some(seed) = seed {
        for p in seed_paths {
            set_path(&mut value, p, Value::from(seed))?;
        }
    }
    Ok(value)
}

fn set_path(root: &mut Value, path: &str, v: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("malformed key path {path:?}")));
    }
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), v);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::config(format!("{path}: {part:?} is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::config(format!("{path}: index {idx} out of range (len {len})")))?;
                if last {
                    *slot = v;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::config(format!("{path}: {part:?} is inside a scalar"))),
        };
    }
    Ok(())
}

/// Typed parse; errors name the JSON path of the bad key or value.
pub fn parse<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::config(inner.to_string())
        } else {
            CliError::config(format!("at {path}: {inner}"))
        }
    })
}

/// Either an explicit list of values or an inclusive `start..stop` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(RangeGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self, what: &str) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Range(r) => qudit_sim::propagator::linear_grid(r.start, r.stop, r.step)
                .map_err(|e| CliError::config(format!("{what}: {e}")))?,
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(format!("{what}: grid must be non-empty and finite")));
        }
        Ok(v)
    }
}

/// Time axis in ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start_ns: f64,
    pub stop_ns: f64,
    pub step_ns: f64,
}

impl TimeGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = qudit_sim::propagator::linear_grid(self.start_ns, self.stop_ns, self.step_ns)
            .map_err(|e| CliError::config(format!("time grid: {e}")))?;
        if v.iter().any(|t| *t < 0.0) {
            return Err(CliError::config("time grid: times must be non-negative"));
        }
        Ok(v)
    }
}

pub fn default_qudit() -> qudit_sim::QuditSpec {
    qudit_sim::default_tb_qudit()
}
