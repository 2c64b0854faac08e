//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use symplab::maps::{build_map, parse_map_spec, MapSpec};

use crate::error::CliError;

/// Parses a config file body. Blank lines and lines starting with `#` are
/// skipped; a key may appear once.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = split_pair(line).ok_or_else(|| {
            CliError::Config(format!("line {}: expected key = value, got '{line}'", i + 1))
        })?;
        if out.insert(k.clone(), v).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

/// Splits `key=value` at the first `=`; the key must be nonempty.
pub fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() || k.contains(char::is_whitespace) {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Resolved key set for one experiment: every declared key has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Fills defaults, rejects unknown keys and requires `seed`.
    pub fn resolve(
        experiment: &str,
        keys: &[(&str, &str)],
        given: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (k, v) in given {
            if k == "experiment" {
                continue;
            }
            if k != "seed" && !keys.iter().any(|(name, _)| name == k) {
                return Err(CliError::Config(format!(
                    "unknown key '{k}' for experiment {experiment}"
                )));
            }
            values.insert(k.clone(), v.clone());
        }
        if !values.contains_key("seed") {
            return Err(CliError::Config("seed is mandatory".into()));
        }
        for (k, default) in keys {
            values
                .entry(k.to_string())
                .or_insert_with(|| default.to_string());
        }
        let p = Params { values };
        p.u64("seed")?;
        Ok(p)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, key: &str) -> Result<&str, CliError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Config(format!("missing key '{key}'")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T, CliError> {
        let s = self.str(key)?;
        s.parse()
            .map_err(|_| CliError::Config(format!("key '{key}': expected {what}, got '{s}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parsed(key, "a number")?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("key '{key}' must be finite")));
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn u32(&self, key: &str) -> Result<u32, CliError> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.parsed(key, "a nonnegative integer")
    }

    /// Comma-separated numbers.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let s = self.str(key)?;
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Config(format!("key '{key}': bad number '{t}'")))
            })
            .collect()
    }

    /// A single map spec, instantiated once to check that it resolves.
    pub fn map_spec(&self, key: &str) -> Result<MapSpec, CliError> {
        resolve_map(self.str(key)?)
    }

    /// Semicolon-separated map specs.
    pub fn map_list(&self, key: &str) -> Result<Vec<MapSpec>, CliError> {
        let s = self.str(key)?;
        s.split(';')
            .map(|t| resolve_map(t.trim()))
            .collect()
    }
}

fn resolve_map(s: &str) -> Result<MapSpec, CliError> {
    let spec = parse_map_spec(s).map_err(|e| CliError::Config(format!("map '{s}': {e}")))?;
    build_map(&spec).map_err(|e| CliError::Config(format!("map '{s}': {e}")))?;
    Ok(spec)
}
