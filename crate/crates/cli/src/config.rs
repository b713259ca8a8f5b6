//! Experiment configuration: file + flags merged with flags winning,
//! unknown keys rejected by name, numeric ranges validated at parse time.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("field `{0}` out of range: {1}")]
    Range(&'static str, String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("config file: {0}")]
    File(String),
}

/// Parse a TOML config file into a flat key map, rejecting keys outside the
/// allowed set.
pub fn load_file(
    path: &Path,
    allowed: &[&str],
) -> Result<BTreeMap<String, toml::Value>, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError::File(format!("{path:?}: {e}")))?;
    let value: toml::Value =
        toml::from_str(&text).map_err(|e| ConfigError::File(e.to_string()))?;
    let table = value
        .as_table()
        .ok_or_else(|| ConfigError::File("expected a table at top level".into()))?;
    let mut map = BTreeMap::new();
    for (k, v) in table {
        if !allowed.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        map.insert(k.clone(), v.clone());
    }
    Ok(map)
}

pub fn get_f64(
    map: &BTreeMap<String, toml::Value>,
    key: &'static str,
) -> Result<Option<f64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .map(Some)
            .ok_or_else(|| ConfigError::Range(key, format!("expected a number, got {v}"))),
    }
}

pub fn get_u64(
    map: &BTreeMap<String, toml::Value>,
    key: &'static str,
) -> Result<Option<u64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_integer()
            .map(|i| i as u64)
            .map(Some)
            .ok_or_else(|| ConfigError::Range(key, format!("expected an integer, got {v}"))),
    }
}

pub fn get_string(
    map: &BTreeMap<String, toml::Value>,
    key: &'static str,
) -> Result<Option<String>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_str()
            .map(|s| Some(s.to_string()))
            .ok_or_else(|| ConfigError::Range(key, format!("expected a string, got {v}"))),
    }
}

pub fn get_f64_list(
    map: &BTreeMap<String, toml::Value>,
    key: &'static str,
) -> Result<Option<Vec<f64>>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| ConfigError::Range(key, "expected an array".into()))?;
            let mut out = Vec::with_capacity(arr.len());
            for item in arr {
                out.push(
                    item.as_float()
                        .or_else(|| item.as_integer().map(|i| i as f64))
                        .ok_or_else(|| ConfigError::Range(key, "expected numbers".into()))?,
                );
            }
            Ok(Some(out))
        }
    }
}

pub fn get_usize_list(
    map: &BTreeMap<String, toml::Value>,
    key: &'static str,
) -> Result<Option<Vec<usize>>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| ConfigError::Range(key, "expected an array".into()))?;
            let mut out = Vec::with_capacity(arr.len());
            for item in arr {
                let i = item
                    .as_integer()
                    .ok_or_else(|| ConfigError::Range(key, "expected integers".into()))?;
                if i < 0 {
                    return Err(ConfigError::Range(key, format!("negative value {i}")));
                }
                out.push(i as usize);
            }
            Ok(Some(out))
        }
    }
}

/// Resolved `simulate` configuration.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SimulateConfig {
    pub schema_version: String,
    pub model: PathBuf,
    pub initial: Option<PathBuf>,
    pub n: usize,
    pub dt: f64,
    pub t: f64,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::Range("n", format!("need n >= 2, got {}", self.n)));
        }
        if !(self.dt > 0.0) {
            return Err(ConfigError::Range("dt", "must be positive".into()));
        }
        if self.t < 0.0 {
            return Err(ConfigError::Range("t", "must be nonnegative".into()));
        }
        if self.t > 0.0 && self.dt > self.t {
            return Err(ConfigError::Range(
                "dt",
                format!("dt = {} exceeds horizon t = {}", self.dt, self.t),
            ));
        }
        for c in &self.checkpoints {
            if *c < 0.0 || *c > self.t {
                return Err(ConfigError::Range(
                    "checkpoints",
                    format!("checkpoint {c} outside [0, {}]", self.t),
                ));
            }
        }
        Ok(())
    }
}

/// Resolved `meanfield` configuration.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeanfieldConfig {
    pub schema_version: String,
    pub model: PathBuf,
    pub initial: Option<PathBuf>,
    pub m: usize,
    pub dt: f64,
    pub mesh: f64,
    pub t: f64,
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    pub window: Option<f64>,
    pub seed: u64,
}

impl MeanfieldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.m == 0 {
            return Err(ConfigError::Range("m", "must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(ConfigError::Range("dt", "must be positive".into()));
        }
        if !(self.t > 0.0) {
            return Err(ConfigError::Range("t", "must be positive".into()));
        }
        if self.dt > self.t {
            return Err(ConfigError::Range("dt", "exceeds the horizon".into()));
        }
        if !(self.mesh > 0.0) || self.mesh > self.t || self.dt > self.mesh {
            return Err(ConfigError::Range(
                "mesh",
                "need dt <= mesh <= t".into(),
            ));
        }
        if !(self.picard_tol > 0.0) {
            return Err(ConfigError::Range("picard_tol", "must be positive".into()));
        }
        Ok(())
    }
}

/// Resolved `chaos` configuration (rate experiment or the empirical-measure
/// bound check).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChaosConfig {
    pub schema_version: String,
    pub model: PathBuf,
    pub initial: Option<PathBuf>,
    pub initial_size: usize,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub t: f64,
    pub dt: f64,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
    pub aleph_trials: usize,
    pub m: usize,
    pub mesh: f64,
    pub picard_tol: f64,
    pub slope_band: (f64, f64),
}

impl ChaosConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_list.len() < 3 {
            return Err(ConfigError::Range("n_list", "need at least 3 values".into()));
        }
        if self.n_list.iter().any(|n| *n < 2) {
            return Err(ConfigError::Range("n_list", "entries must be >= 2".into()));
        }
        if self.trials < 2 {
            return Err(ConfigError::Range("trials", "need at least 2".into()));
        }
        if !(self.dt > 0.0) || !(self.t > 0.0) || self.dt > self.t {
            return Err(ConfigError::Range("dt", "need 0 < dt <= t".into()));
        }
        if self.slope_band.0 >= self.slope_band.1 {
            return Err(ConfigError::Range("slope_band", "must be ordered".into()));
        }
        Ok(())
    }
}
