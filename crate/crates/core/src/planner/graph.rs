//! Continuous Monte Carlo Graph Search.
//!
//! The search graph is a stack of layers, one per simulated timestep. Each
//! layer partitions the states visited at that depth into nodes; every node
//! owns a replay memory, a Gaussian model of its states and a Gaussian action
//! bandit. One iteration of the search:
//!
//! 1. walks the graph from the root, sampling each node's bandit and routing
//!    the resulting state to the most likely node of the next layer,
//! 2. appends a fresh layer when the frontier has seen enough experience,
//! 3. finishes the trajectory with a short uniform-random rollout,
//! 4. stores the trajectory in the visited nodes labelled with its total
//!    return, re-clustering a layer into more nodes when its pooled replay
//!    supports it.
//!
//! The graph is rebuilt from scratch on every call to [`CmcgsPlanner::plan`].

use serde::{Deserialize, Serialize};

use crate::cluster::{check_split, ClusterAssignment, Dendrogram};
use crate::env::{EnvSnapshot, Environment};
use crate::error::{Error, Result};
use crate::params::CmcgsParams;
use crate::planner::{check_plan_inputs, uniform_rollout, PlanRng, Planner, PlannerKind, PlannerResult};
use crate::stats::{ActionBandit, DiagonalGaussian, Experience};

/// One cluster of visited states.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    replay: Vec<Experience>,
    state_model: Option<DiagonalGaussian>,
    bandit: ActionBandit,
}

impl GraphNode {
    pub fn new(action_dim: usize, params: &CmcgsParams) -> Self {
        Self { replay: Vec::new(), state_model: None, bandit: ActionBandit::prior(action_dim, &params.bandit_std) }
    }

    /// Node holding `replay`, with models fitted to it.
    pub fn from_replay(replay: Vec<Experience>, action_dim: usize, params: &CmcgsParams) -> Result<Self> {
        let mut node = Self::new(action_dim, params);
        node.replay = replay;
        node.refit(params)?;
        Ok(node)
    }

    pub fn replay(&self) -> &[Experience] {
        &self.replay
    }

    pub fn visits(&self) -> usize {
        self.replay.len()
    }

    pub fn state_model(&self) -> Option<&DiagonalGaussian> {
        self.state_model.as_ref()
    }

    pub fn bandit(&self) -> &ActionBandit {
        &self.bandit
    }

    pub fn push(&mut self, experience: Experience) {
        self.replay.push(experience);
    }

    /// Refits both models from the replay. Below `m_min` experiences the
    /// node keeps the bandit prior and a unit Gaussian on its first state.
    pub fn refit(&mut self, params: &CmcgsParams) -> Result<()> {
        let Some(first) = self.replay.first() else {
            self.state_model = None;
            return Ok(());
        };
        if self.replay.len() < params.split.m_min {
            self.state_model = Some(DiagonalGaussian::unit(first.state.clone()));
            self.bandit = ActionBandit::prior(first.action.len(), &params.bandit_std);
        } else {
            let states: Vec<&[f64]> = self.replay.iter().map(|e| e.state.as_slice()).collect();
            self.state_model = Some(DiagonalGaussian::fit(&states)?);
            self.bandit = ActionBandit::fit(&self.replay, params.elite_ratio, &params.bandit_std)?;
        }
        Ok(())
    }

    fn log_likelihood(&self, state: &[f64]) -> f64 {
        self.state_model.as_ref().and_then(|m| m.log_likelihood(state).ok()).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Index of the node whose state model gives `state` the highest likelihood.
/// Ties go to the lowest index.
pub fn select_next_node(layer: &[GraphNode], state: &[f64]) -> usize {
    if layer.len() <= 1 {
        return 0;
    }
    let mut best = 0;
    let mut best_ll = layer[0].log_likelihood(state);
    for (i, node) in layer.iter().enumerate().skip(1) {
        let ll = node.log_likelihood(state);
        if ll > best_ll {
            best = i;
            best_ll = ll;
        }
    }
    best
}

/// One transition of a graph walk.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub layer: usize,
    pub node: usize,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub next_state: Vec<f64>,
}

/// Result of walking the graph once.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub trajectory: Vec<TrajectoryStep>,
    pub reward: f64,
    pub terminal: bool,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchGraph {
    layers: Vec<Vec<GraphNode>>,
    action_dim: usize,
    max_depth: usize,
    params: CmcgsParams,
}

impl SearchGraph {
    /// One single-node layer per level up to `min(initial_depth, max_depth)`.
    pub fn new(action_dim: usize, max_depth: usize, params: CmcgsParams) -> Self {
        let depth = params.initial_depth.min(max_depth).max(1);
        let layers = (0..depth).map(|_| vec![GraphNode::new(action_dim, &params)]).collect();
        Self { layers, action_dim, max_depth: max_depth.max(1), params }
    }

    pub fn layers(&self) -> &[Vec<GraphNode>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn root(&self) -> &GraphNode {
        &self.layers[0][0]
    }

    pub fn params(&self) -> &CmcgsParams {
        &self.params
    }

    /// Replaces a layer wholesale. Intended for tests and tooling.
    pub fn set_layer(&mut self, index: usize, nodes: Vec<GraphNode>) {
        assert!(!nodes.is_empty(), "a layer needs at least one node");
        self.layers[index] = nodes;
    }

    pub fn layer_replay_len(&self, layer: usize) -> usize {
        self.layers[layer].iter().map(GraphNode::visits).sum()
    }

    /// Appends a fresh single-node layer when the graph is shallower than the
    /// initial depth or the last layer holds at least `n_depth` experiences,
    /// and the graph is shallower than the remaining episode.
    pub fn try_depth_expand(&mut self) -> bool {
        let depth = self.depth();
        let last_total = self.layer_replay_len(depth - 1);
        let wanted = depth < self.params.initial_depth || last_total >= self.params.n_depth;
        if wanted && depth < self.max_depth {
            self.layers.push(vec![GraphNode::new(self.action_dim, &self.params)]);
            true
        } else {
            false
        }
    }

    /// Walks from the root, sampling actions from node bandits, until a
    /// terminal state, the last layer, or `allowance` steps.
    pub fn graph_policy(&mut self, sim: &mut dyn Environment, allowance: u64, rng: &mut PlanRng) -> Result<Walk> {
        let mut walk = Walk { trajectory: Vec::new(), reward: 0.0, terminal: sim.is_terminal(), steps: 0 };
        let mut state = sim.observe();
        let mut node = 0;
        let mut layer = 0;
        while !walk.terminal && walk.steps < allowance {
            let action = self.layers[layer][node].bandit.sample(rng);
            let t = sim.step(&action)?;
            walk.steps += 1;
            walk.reward += t.reward;
            walk.terminal = t.terminal;
            walk.trajectory.push(TrajectoryStep {
                layer,
                node,
                state: std::mem::take(&mut state),
                action,
                next_state: t.state.clone(),
            });
            let last = layer + 1 == self.depth();
            if !t.terminal && last {
                self.try_depth_expand();
            }
            if t.terminal || last {
                break;
            }
            layer += 1;
            node = select_next_node(&self.layers[layer], &t.state);
            state = t.state;
        }
        Ok(walk)
    }

    /// Stores the walk in the visited nodes with return label `ret`, widening
    /// layers whose pooled replay now supports more clusters.
    pub fn backup(&mut self, trajectory: &[TrajectoryStep], ret: f64) -> Result<()> {
        for step in trajectory {
            let node = &mut self.layers[step.layer][step.node];
            node.push(Experience {
                state: step.state.clone(),
                action: step.action.clone(),
                ret,
                next_state: step.next_state.clone(),
            });
            if !self.try_width_expand(step.layer)? {
                self.layers[step.layer][step.node].refit(&self.params)?;
            }
        }
        Ok(())
    }

    /// Tries `c*`, then every smaller count above the current width, and
    /// applies the first clustering whose clusters all reach `m_min`.
    fn try_width_expand(&mut self, layer: usize) -> Result<bool> {
        if layer == 0 {
            return Ok(false);
        }
        let current = self.layers[layer].len();
        let pooled = self.layer_replay_len(layer);
        let desired = self.params.split.desired_cluster_count(pooled);
        if desired <= current {
            return Ok(false);
        }
        let states: Vec<&[f64]> =
            self.layers[layer].iter().flat_map(|n| n.replay.iter().map(|e| e.state.as_slice())).collect();
        let dendrogram = Dendrogram::ward(&states)?;
        for k in (current + 1..=desired.min(pooled)).rev() {
            if let Ok(assignment) = check_split(dendrogram.cut(k)?, self.params.split.m_min) {
                self.width_expand(layer, &assignment)?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Rebuilds a layer with one node per cluster of its pooled replay.
    ///
    /// `assignment` labels the pooled replay in node order, then insertion
    /// order within each node.
    pub fn width_expand(&mut self, layer: usize, assignment: &ClusterAssignment) -> Result<()> {
        let pooled: Vec<Experience> =
            self.layers[layer].iter_mut().flat_map(|n| std::mem::take(&mut n.replay)).collect();
        if assignment.len() != pooled.len() {
            return Err(Error::DimensionMismatch { expected: pooled.len(), actual: assignment.len() });
        }
        let mut groups: Vec<Vec<Experience>> = vec![Vec::new(); assignment.k()];
        for (exp, &label) in pooled.into_iter().zip(assignment.labels()) {
            groups[label].push(exp);
        }
        self.layers[layer] = groups
            .into_iter()
            .map(|replay| GraphNode::from_replay(replay, self.action_dim, &self.params))
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Action of the best-scoring root experience; ties go to the earliest.
    pub fn best_root_action(&self) -> Result<Vec<f64>> {
        best_action(self.root())
    }

    pub fn dump(&self) -> GraphDump {
        GraphDump {
            layers: self
                .layers
                .iter()
                .map(|nodes| LayerDump {
                    nodes: nodes
                        .iter()
                        .map(|n| NodeDump {
                            state_mean: n.state_model.as_ref().map(|m| m.mean().to_vec()),
                            state_variance: n.state_model.as_ref().map(|m| m.variance().to_vec()),
                            action_mean: n.bandit.mean().to_vec(),
                            action_std: n.bandit.scalar_std(),
                            visits: n.visits(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Action of the experience with the largest return; ties go to the earliest.
pub fn best_action(node: &GraphNode) -> Result<Vec<f64>> {
    let mut best: Option<&Experience> = None;
    for e in &node.replay {
        if best.is_none_or(|b| e.ret > b.ret) {
            best = Some(e);
        }
    }
    best.map(|e| e.action.clone()).ok_or(Error::NoExperience)
}

/// Serializable view of a search graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub layers: Vec<LayerDump>,
}

impl GraphDump {
    pub fn shape(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.nodes.len()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDump {
    pub nodes: Vec<NodeDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDump {
    pub state_mean: Option<Vec<f64>>,
    pub state_variance: Option<Vec<f64>>,
    pub action_mean: Vec<f64>,
    pub action_std: f64,
    pub visits: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CmcgsPlanner {
    params: CmcgsParams,
}

impl CmcgsPlanner {
    pub fn new(params: CmcgsParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &CmcgsParams {
        &self.params
    }

    /// Runs the search, calling `observe` with the graph after every iteration.
    pub fn plan_with(
        &self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
        mut observe: impl FnMut(&SearchGraph),
    ) -> Result<(PlannerResult, SearchGraph)> {
        check_plan_inputs(sim, root, budget)?;
        let start = sim.steps_taken();
        let mut graph = SearchGraph::new(sim.action_dim(), sim.remaining_steps(), self.params.clone());
        let mut iterations = 0;

        loop {
            let used = sim.steps_taken() - start;
            let worst_case = (graph.depth() + self.params.rollout_length) as u64;
            if used >= budget || (iterations > 0 && used + worst_case > budget) {
                break;
            }
            let allowance = budget - used;
            sim.restore(root)?;
            let walk = graph.graph_policy(sim, allowance, rng)?;
            let mut ret = walk.reward;
            if !walk.terminal {
                ret += uniform_rollout(sim, self.params.rollout_length, allowance - walk.steps, rng)?.reward;
            }
            graph.backup(&walk.trajectory, ret)?;
            iterations += 1;
            observe(&graph);
        }
        sim.restore(root)?;

        let result = PlannerResult {
            action: graph.best_root_action()?,
            env_steps_used: sim.steps_taken() - start,
            graph_shape: graph.shape(),
            iterations,
            graph: Some(graph.dump()),
        };
        Ok((result, graph))
    }
}

impl Planner for CmcgsPlanner {
    fn kind(&self) -> PlannerKind {
        PlannerKind::Cmcgs
    }

    fn plan(
        &mut self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
    ) -> Result<PlannerResult> {
        self.plan_with(sim, root, budget, rng, |_| {}).map(|(r, _)| r)
    }
}
