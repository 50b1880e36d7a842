//! Decision-time planners sharing one budgeted interface.
//!
//! A planner receives a private simulator and a snapshot of the decision
//! state. It may call `step` on the simulator at most `budget` times and
//! returns the action to execute plus telemetry.

use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvSnapshot, Environment};
use crate::error::{Error, Result};
use crate::params::Hyperparameters;

pub mod cem;
pub mod graph;
pub mod mcts_pw;
pub mod random;

pub use cem::CemPlanner;
pub use graph::{CmcgsPlanner, GraphDump, GraphNode, SearchGraph};
pub use mcts_pw::MctsPwPlanner;
pub use random::RandomPlanner;

/// Random number generator threaded through every planner call.
pub type PlanRng = ChaCha8Rng;

/// Action chosen by a planner plus search telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerResult {
    pub action: Vec<f64>,
    pub env_steps_used: u64,
    /// Node count per layer of the final search graph; empty for planners
    /// without a layered graph.
    pub graph_shape: Vec<usize>,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<GraphDump>,
}

pub trait Planner: Send {
    fn kind(&self) -> PlannerKind;

    fn plan(
        &mut self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
    ) -> Result<PlannerResult>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlannerKind {
    #[serde(rename = "cmcgs")]
    Cmcgs,
    #[serde(rename = "cem")]
    Cem,
    #[serde(rename = "mcts-pw")]
    MctsPw,
    #[serde(rename = "random")]
    Random,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [PlannerKind::Cmcgs, PlannerKind::Cem, PlannerKind::MctsPw, PlannerKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Cmcgs => "cmcgs",
            PlannerKind::Cem => "cem",
            PlannerKind::MctsPw => "mcts-pw",
            PlannerKind::Random => "random",
        }
    }

    pub fn build(self, params: &Hyperparameters) -> Box<dyn Planner> {
        match self {
            PlannerKind::Cmcgs => Box::new(CmcgsPlanner::new(params.cmcgs.clone())),
            PlannerKind::Cem => Box::new(CemPlanner::new(params.cem.clone())),
            PlannerKind::MctsPw => Box::new(MctsPwPlanner::new(params.pw.clone())),
            PlannerKind::Random => Box::new(RandomPlanner),
        }
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::UnknownPlanner(s.to_string()))
    }
}

/// Uniform action in `[-1, 1]^dim`.
pub fn uniform_action<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Outcome of a uniform-random rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutOutcome {
    pub reward: f64,
    pub steps: u64,
}

/// Plays at most `max_len` uniform actions (and at most `allowance` steps)
/// from the simulator's current state, stopping at a terminal state.
pub fn uniform_rollout(
    sim: &mut dyn Environment,
    max_len: usize,
    allowance: u64,
    rng: &mut PlanRng,
) -> Result<RolloutOutcome> {
    let mut out = RolloutOutcome { reward: 0.0, steps: 0 };
    let dim = sim.action_dim();
    while (out.steps as usize) < max_len && out.steps < allowance && !sim.is_terminal() {
        let t = sim.step(&uniform_action(dim, rng))?;
        out.reward += t.reward;
        out.steps += 1;
    }
    Ok(out)
}

pub(crate) fn check_plan_inputs(sim: &mut dyn Environment, root: &EnvSnapshot, budget: u64) -> Result<()> {
    if budget == 0 {
        return Err(Error::InvalidParameter { key: "budget".into(), reason: "must be at least 1".into() });
    }
    sim.restore(root)?;
    if sim.is_terminal() {
        return Err(Error::EpisodeTerminated);
    }
    Ok(())
}
