//! Budget-sweep experiment runner.
//!
//! Each episode resets the environment, then at every decision step hands a
//! clone of the environment and a snapshot of the current state to the
//! planner, and executes the returned action on the real environment. All
//! randomness of an episode comes from one generator seeded with the
//! episode seed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::load_environment;
use crate::error::{Error, Result};
use crate::params::Hyperparameters;
use crate::planner::{GraphDump, PlanRng, PlannerKind};

pub mod aggregate;
pub mod export;

pub use aggregate::{aggregate, read_episode_csv, write_aggregate_csv, AggregateRow, EpisodeCsvWriter, EpisodeRow};
pub use export::{export_graph, export_trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Preset name or path to a layout file.
    pub env: String,
    pub planner: PlannerKind,
    /// Simulation steps per decision.
    pub budget: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub trace_dir: Option<PathBuf>,
    #[serde(default)]
    pub graph_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(env: impl Into<String>, planner: PlannerKind, budget: u64, seeds: Vec<u64>) -> Self {
        Self {
            env: env.into(),
            planner,
            budget,
            seeds,
            overrides: BTreeMap::new(),
            out: None,
            trace_dir: None,
            graph_dir: None,
        }
    }

    /// Checks the config and resolves its hyperparameters.
    pub fn validate(&self) -> Result<Hyperparameters> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        load_environment(&self.env)?;
        let mut params = Hyperparameters::default();
        params.apply(&self.overrides)?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
}

/// Planner telemetry for one decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTelemetry {
    pub env_steps_used: u64,
    pub iterations: usize,
    pub graph_shape: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<GraphDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub env: String,
    pub planner: PlannerKind,
    pub budget: u64,
    pub seed: u64,
    /// Decision steps available at reset.
    pub episode_cap: usize,
    pub steps: Vec<StepRecord>,
    pub total_return: f64,
    pub telemetry: Vec<DecisionTelemetry>,
}

/// Plays one episode. Graph dumps are kept only when `keep_graphs` is set.
pub fn run_episode(
    config: &ExperimentConfig,
    params: &Hyperparameters,
    seed: u64,
    keep_graphs: bool,
) -> Result<EpisodeRecord> {
    let mut env = load_environment(&config.env)?;
    let mut planner = config.planner.build(params);
    let mut rng = PlanRng::seed_from_u64(seed);
    let mut state = env.reset(seed);
    let mut sim = env.boxed_clone();
    let episode_cap = env.remaining_steps();

    let mut steps = Vec::new();
    let mut telemetry = Vec::new();
    let mut total_return = 0.0;
    while !env.is_terminal() {
        let snapshot = env.snapshot();
        let before = sim.steps_taken();
        let mut result = planner.plan(sim.as_mut(), &snapshot, config.budget, &mut rng)?;
        let used = sim.steps_taken() - before;
        if used > config.budget || used != result.env_steps_used {
            return Err(Error::BudgetOverrun { used, budget: config.budget });
        }
        let t = env.step(&result.action)?;
        total_return += t.reward;
        steps.push(StepRecord {
            state: std::mem::replace(&mut state, t.state),
            action: result.action,
            reward: t.reward,
        });
        telemetry.push(DecisionTelemetry {
            env_steps_used: used,
            iterations: result.iterations,
            graph_shape: result.graph_shape,
            graph: if keep_graphs { result.graph.take() } else { None },
        });
    }

    Ok(EpisodeRecord {
        env: config.env.clone(),
        planner: config.planner,
        budget: config.budget,
        seed,
        episode_cap,
        steps,
        total_return,
        telemetry,
    })
}

/// Runs every seed in order, handing each finished record to `sink`.
pub fn run_experiment(
    config: &ExperimentConfig,
    mut sink: impl FnMut(&EpisodeRecord) -> Result<()>,
) -> Result<Vec<EpisodeRecord>> {
    let params = config.validate()?;
    let keep_graphs = config.graph_dir.is_some();
    let mut records = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let record = run_episode(config, &params, seed, keep_graphs)?;
        sink(&record)?;
        records.push(record);
    }
    Ok(records)
}

/// Runs the seeds in parallel; records come back in seed order.
pub fn run_experiment_parallel(config: &ExperimentConfig) -> Result<Vec<EpisodeRecord>> {
    let params = config.validate()?;
    let keep_graphs = config.graph_dir.is_some();
    config.seeds.par_iter().map(|&seed| run_episode(config, &params, seed, keep_graphs)).collect()
}

/// Parses `N` (seeds `0..N`) or a comma-separated list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse seeds `{text}`"));
    let text = text.trim();
    if text.contains(',') {
        text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse::<u64>().map_err(|_| bad())).collect()
    } else {
        let n: u64 = text.parse().map_err(|_| bad())?;
        Ok((0..n).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 9,1").unwrap(), vec![4, 9, 1]);
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn invalid_configs_fail_before_running() {
        let mut c = ExperimentConfig::new("nowhere", PlannerKind::Random, 10, vec![0]);
        assert!(matches!(c.validate(), Err(Error::UnknownEnvironment(_))));
        c.env = "2d-navigation-boxes".into();
        c.seeds.clear();
        assert!(c.validate().is_err());
        c.seeds.push(1);
        c.budget = 0;
        assert!(c.validate().is_err());
        c.budget = 5;
        c.overrides.insert("nonsense".into(), 1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn random_episode_accounts_its_return() {
        let c = ExperimentConfig::new("2d-navigation-boxes", PlannerKind::Random, 10, vec![0, 1]);
        let records = run_experiment(&c, |_| Ok(())).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            let sum: f64 = r.steps.iter().map(|s| s.reward).sum();
            assert_eq!(sum, r.total_return);
            assert_eq!(r.steps.len(), r.telemetry.len());
            assert_eq!(r.episode_cap, 10);
        }
    }
}
