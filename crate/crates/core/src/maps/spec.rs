//! `name:key=value,...` map specifications for the map zoo.

use std::fmt;

use super::{CatMap, IdentityMap, LinearSaddle, PlanarMap, RotationMap, ShearMap, SqueezeMap, StandardMap};
use crate::error::{Error, Result};
use crate::flow::SpherePendulum;
use crate::horseshoe::{SnakeModel, SnakeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub name: String,
    /// Keys are stored lowercase, in the order given.
    pub params: Vec<(String, f64)>,
}

impl MapSpec {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| Error::Spec(format!("map '{}' requires parameter '{key}'", self.name)))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Spec(format!(
                    "unknown parameter '{k}' for map '{}' (allowed: {})",
                    self.name,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

/// Parse `name[:key=value(,key=value)*]`. Keys are case-folded to lowercase.
pub fn parse_map_spec(s: &str) -> Result<MapSpec> {
    let s = s.trim();
    let (name, rest) = match s.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (s, None),
    };
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    {
        return Err(Error::Spec(format!("invalid map name '{name}'")));
    }
    let mut params = Vec::new();
    if let Some(rest) = rest {
        if rest.trim().is_empty() {
            return Err(Error::Spec(format!("empty parameter list in '{s}'")));
        }
        for pair in rest.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Spec(format!("expected key=value, got '{pair}'")))?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Spec(format!("invalid parameter key '{k}'")));
            }
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Spec(format!("invalid number '{v}' for key '{key}'")))?;
            if params.iter().any(|(existing, _)| *existing == key) {
                return Err(Error::Spec(format!("duplicate parameter '{key}'")));
            }
            params.push((key, value));
        }
    }
    Ok(MapSpec {
        name: name.to_string(),
        params,
    })
}

fn as_int(spec: &MapSpec, key: &str, v: f64) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::Spec(format!(
            "parameter '{key}' of '{}' must be an integer, got {v}",
            spec.name
        )));
    }
    Ok(v as i64)
}

/// Instantiate a zoo map from its specification.
pub fn build_map(spec: &MapSpec) -> Result<Box<dyn PlanarMap>> {
    let map: Box<dyn PlanarMap> = match spec.name.as_str() {
        "identity" => {
            spec.check_keys(&[])?;
            Box::new(IdentityMap::unit_torus())
        }
        "cat" => {
            spec.check_keys(&["a", "b", "c", "d"])?;
            let mut m = [[2, 1], [1, 1]];
            for (key, (i, j)) in [("a", (0, 0)), ("b", (0, 1)), ("c", (1, 0)), ("d", (1, 1))] {
                if let Some(v) = spec.get(key) {
                    m[i][j] = as_int(spec, key, v)?;
                }
            }
            Box::new(CatMap::new(m)?)
        }
        "standard" => {
            spec.check_keys(&["k"])?;
            Box::new(StandardMap { k: spec.require("k")? })
        }
        "rotation" => {
            spec.check_keys(&["alpha"])?;
            Box::new(RotationMap {
                alpha: spec.require("alpha")?,
            })
        }
        "shear" => {
            spec.check_keys(&[])?;
            Box::new(ShearMap)
        }
        "saddle" => {
            spec.check_keys(&["lambda"])?;
            let lambda = spec.require("lambda")?;
            if !(lambda > 0.0) {
                return Err(Error::Parameter(format!("saddle lambda must be > 0, got {lambda}")));
            }
            Box::new(LinearSaddle { lambda })
        }
        "squeeze" => {
            spec.check_keys(&["c"])?;
            Box::new(SqueezeMap {
                c: spec.get_or("c", 0.5),
            })
        }
        "sphere_pendulum" => {
            spec.check_keys(&["t", "step"])?;
            Box::new(SpherePendulum::new(
                spec.get_or("t", 1.0),
                spec.get_or("step", SpherePendulum::DEFAULT_STEP),
            )?)
        }
        "snake" => {
            spec.check_keys(&["lambda", "a", "delta", "n"])?;
            let n = as_int(spec, "n", spec.require("n")?)?;
            if n < 0 {
                return Err(Error::Parameter("snake leg count must be positive".into()));
            }
            Box::new(SnakeModel::new(SnakeParams::new(
                spec.require("lambda")?,
                spec.require("a")?,
                spec.require("delta")?,
                n as u128,
            ))?)
        }
        other => return Err(Error::Spec(format!("unknown map '{other}'"))),
    };
    Ok(map)
}

/// Names accepted by [`build_map`].
pub const ZOO_NAMES: &[&str] = &[
    "identity",
    "cat",
    "standard",
    "rotation",
    "shear",
    "saddle",
    "squeeze",
    "sphere_pendulum",
    "snake",
];
