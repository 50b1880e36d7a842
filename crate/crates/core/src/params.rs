//! Planner hyperparameters and the flat key/value override format.
//!
//! A config file is a flat TOML document, e.g.
//!
//! ```toml
//! initial_depth = 3
//! max_rollout_length = 5
//! elite_ratio = 0.1
//! cem_population = 64
//! ```
//!
//! See [`Hyperparameters::KEYS`] for the accepted keys.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::SplitPolicy;
use crate::error::{Error, Result};
use crate::stats::StdSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmcgsParams {
    pub initial_depth: usize,
    pub rollout_length: usize,
    pub elite_ratio: f64,
    pub bandit_std: StdSchedule,
    pub split: SplitPolicy,
    /// Last-layer experiences needed before another layer is appended.
    pub n_depth: usize,
}

impl Default for CmcgsParams {
    fn default() -> Self {
        Self {
            initial_depth: 3,
            rollout_length: 5,
            elite_ratio: 0.1,
            bandit_std: StdSchedule::default(),
            split: SplitPolicy::default(),
            n_depth: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemParams {
    pub horizon: usize,
    pub population: usize,
    pub elite_fraction: f64,
    pub init_std: f64,
    pub std_floor: f64,
}

impl Default for CemParams {
    fn default() -> Self {
        Self { horizon: 15, population: 32, elite_fraction: 0.1, init_std: 0.5, std_floor: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwParams {
    pub k: f64,
    pub alpha: f64,
    pub uct_c: f64,
    pub rollout_length: usize,
}

impl Default for PwParams {
    fn default() -> Self {
        Self { k: 1.0, alpha: 0.5, uct_c: std::f64::consts::SQRT_2, rollout_length: 5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub cmcgs: CmcgsParams,
    pub cem: CemParams,
    pub pw: PwParams,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { key: key.to_string(), reason: reason.into() }
}

fn as_count(key: &str, value: f64, min: usize) -> Result<usize> {
    if value.fract() != 0.0 || value < min as f64 || !value.is_finite() {
        return Err(invalid(key, format!("expected an integer >= {min}, got {value}")));
    }
    Ok(value as usize)
}

fn as_positive(key: &str, value: f64) -> Result<f64> {
    if !value.is_finite() || value <= 0.0 {
        return Err(invalid(key, format!("expected a positive number, got {value}")));
    }
    Ok(value)
}

fn as_fraction(key: &str, value: f64) -> Result<f64> {
    if !(value > 0.0 && value <= 1.0) {
        return Err(invalid(key, format!("expected a value in (0, 1], got {value}")));
    }
    Ok(value)
}

impl Hyperparameters {
    pub const KEYS: [&'static str; 19] = [
        "initial_depth",
        "max_rollout_length",
        "elite_ratio",
        "discount_factor",
        "bandit_std_initial",
        "bandit_std_minimum",
        "bandit_anneal_samples",
        "n_split",
        "c_max",
        "m_min",
        "n_depth",
        "cem_horizon",
        "cem_population",
        "cem_elite_fraction",
        "cem_init_std",
        "cem_std_floor",
        "pw_k",
        "pw_alpha",
        "uct_c",
    ];

    /// Current value of a config key, or `None` for an unknown key.
    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "initial_depth" => self.cmcgs.initial_depth as f64,
            "max_rollout_length" => self.cmcgs.rollout_length as f64,
            "elite_ratio" => self.cmcgs.elite_ratio,
            "discount_factor" => 1.0,
            "bandit_std_initial" => self.cmcgs.bandit_std.initial,
            "bandit_std_minimum" => self.cmcgs.bandit_std.minimum,
            "bandit_anneal_samples" => self.cmcgs.bandit_std.anneal_samples as f64,
            "n_split" => self.cmcgs.split.n_split as f64,
            "c_max" => self.cmcgs.split.c_max as f64,
            "m_min" => self.cmcgs.split.m_min as f64,
            "n_depth" => self.cmcgs.n_depth as f64,
            "cem_horizon" => self.cem.horizon as f64,
            "cem_population" => self.cem.population as f64,
            "cem_elite_fraction" => self.cem.elite_fraction,
            "cem_init_std" => self.cem.init_std,
            "cem_std_floor" => self.cem.std_floor,
            "pw_k" => self.pw.k,
            "pw_alpha" => self.pw.alpha,
            "uct_c" => self.pw.uct_c,
            _ => return None,
        })
    }

    /// Applies one override.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "initial_depth" => self.cmcgs.initial_depth = as_count(key, value, 1)?,
            "max_rollout_length" => {
                let n = as_count(key, value, 0)?;
                self.cmcgs.rollout_length = n;
                self.pw.rollout_length = n;
            }
            "elite_ratio" => self.cmcgs.elite_ratio = as_fraction(key, value)?,
            "discount_factor" => {
                if value != 1.0 {
                    return Err(invalid(key, "only undiscounted returns (1) are supported"));
                }
            }
            "bandit_std_initial" => self.cmcgs.bandit_std.initial = as_positive(key, value)?,
            "bandit_std_minimum" => self.cmcgs.bandit_std.minimum = as_positive(key, value)?,
            "bandit_anneal_samples" => self.cmcgs.bandit_std.anneal_samples = as_count(key, value, 0)?,
            "n_split" => self.cmcgs.split.n_split = as_count(key, value, 1)?,
            "c_max" => self.cmcgs.split.c_max = as_count(key, value, 1)?,
            "m_min" => self.cmcgs.split.m_min = as_count(key, value, 1)?,
            "n_depth" => self.cmcgs.n_depth = as_count(key, value, 0)?,
            "cem_horizon" => self.cem.horizon = as_count(key, value, 1)?,
            "cem_population" => self.cem.population = as_count(key, value, 1)?,
            "cem_elite_fraction" => self.cem.elite_fraction = as_fraction(key, value)?,
            "cem_init_std" => self.cem.init_std = as_positive(key, value)?,
            "cem_std_floor" => self.cem.std_floor = as_positive(key, value)?,
            "pw_k" => self.pw.k = as_positive(key, value)?,
            "pw_alpha" => self.pw.alpha = as_fraction(key, value)?,
            "uct_c" => {
                if value.is_nan() || value < 0.0 {
                    return Err(invalid(key, "must be non-negative"));
                }
                self.pw.uct_c = value
            }
            _ => return Err(invalid(key, "unknown key")),
        }
        if self.cmcgs.bandit_std.minimum > self.cmcgs.bandit_std.initial {
            return Err(invalid(key, "bandit_std_minimum exceeds bandit_std_initial"));
        }
        Ok(())
    }

    pub fn apply(&mut self, overrides: &BTreeMap<String, f64>) -> Result<()> {
        overrides.iter().try_for_each(|(k, v)| self.set(k, *v))
    }

    /// Reads a flat key/value TOML file into an override map.
    pub fn read_overrides(path: &Path) -> Result<BTreeMap<String, f64>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_overrides(&text)
    }
}

pub fn parse_overrides(text: &str) -> Result<BTreeMap<String, f64>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (key, value) in table {
        let v = match value {
            toml::Value::Integer(i) => i as f64,
            toml::Value::Float(f) => f,
            other => {
                return Err(invalid(&key, format!("expected a number, got {}", other.type_str())));
            }
        };
        out.insert(key, v);
    }
    Ok(out)
}
