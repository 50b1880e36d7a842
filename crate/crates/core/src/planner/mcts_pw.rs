//! UCT with progressive widening on actions.
//!
//! A node visited `N` times may hold at most `max(1, floor(k * N^alpha))`
//! children. While below that bound a visit expands a fresh uniform action;
//! otherwise it descends to the child with the best UCB score, computed on
//! returns rescaled by the running min/max seen so far. Leaves are evaluated
//! with a uniform-random rollout and the undiscounted return of the whole
//! simulation is backed up along the path.

use crate::env::{EnvSnapshot, Environment};
use crate::error::Result;
use crate::params::PwParams;
use crate::planner::{
    check_plan_inputs, uniform_action, uniform_rollout, PlanRng, Planner, PlannerKind, PlannerResult,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PwNode {
    /// Action on the edge from the parent; empty for the root.
    pub action: Vec<f64>,
    pub terminal: bool,
    pub children: Vec<usize>,
    pub visits: u64,
    pub value_sum: f64,
    pub depth: usize,
}

impl PwNode {
    pub fn mean_value(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value_sum / self.visits as f64
        }
    }
}

/// Largest child count allowed after `visits` visits.
pub fn child_limit(params: &PwParams, visits: u64) -> usize {
    ((params.k * (visits as f64).powf(params.alpha)).floor() as usize).max(1)
}

/// Search tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct PwTree {
    pub nodes: Vec<PwNode>,
    min_return: f64,
    max_return: f64,
}

impl PwTree {
    fn new() -> Self {
        let root =
            PwNode { action: Vec::new(), terminal: false, children: Vec::new(), visits: 0, value_sum: 0.0, depth: 0 };
        Self { nodes: vec![root], min_return: f64::INFINITY, max_return: f64::NEG_INFINITY }
    }

    pub fn root(&self) -> &PwNode {
        &self.nodes[0]
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    fn normalized(&self, value: f64) -> f64 {
        if self.max_return > self.min_return {
            (value - self.min_return) / (self.max_return - self.min_return)
        } else {
            0.5
        }
    }

    /// Child with the highest UCB score; ties go to the earliest child.
    pub fn select_child(&self, node: usize, c: f64) -> usize {
        let parent = &self.nodes[node];
        let ln_n = (parent.visits.max(1) as f64).ln();
        let mut best = parent.children[0];
        let mut best_score = f64::NEG_INFINITY;
        for &child in &parent.children {
            let ch = &self.nodes[child];
            let explore = c * (ln_n / ch.visits.max(1) as f64).sqrt();
            let score = self.normalized(ch.mean_value()) + explore;
            if score > best_score {
                best = child;
                best_score = score;
            }
        }
        best
    }

    /// Most visited root child; ties go to the earliest.
    pub fn most_visited_root_child(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &c in &self.root().children {
            if best.is_none_or(|b| self.nodes[c].visits > self.nodes[b].visits) {
                best = Some(c);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Default)]
pub struct MctsPwPlanner {
    params: PwParams,
}

impl MctsPwPlanner {
    pub fn new(params: PwParams) -> Self {
        Self { params }
    }

    /// Runs the search, calling `observe` with the tree after every iteration.
    pub fn search(
        &self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
        mut observe: impl FnMut(&PwTree),
    ) -> Result<(PlannerResult, PwTree)> {
        check_plan_inputs(sim, root, budget)?;
        let start = sim.steps_taken();
        let dim = sim.action_dim();
        let mut tree = PwTree::new();
        let mut iterations = 0;

        loop {
            let used = sim.steps_taken() - start;
            let worst_case = (tree.max_depth() + 1 + self.params.rollout_length) as u64;
            if used >= budget || (iterations > 0 && used + worst_case > budget) {
                break;
            }
            let allowance = budget - used;
            sim.restore(root)?;

            let mut path = vec![0];
            let mut node = 0;
            let mut ret = 0.0;
            let mut steps = 0u64;
            while !tree.nodes[node].terminal && steps < allowance {
                let n = &tree.nodes[node];
                if n.children.len() < child_limit(&self.params, n.visits) {
                    let action = uniform_action(dim, rng);
                    let t = sim.step(&action)?;
                    steps += 1;
                    ret += t.reward;
                    let child = tree.nodes.len();
                    tree.nodes.push(PwNode {
                        action,
                        terminal: t.terminal,
                        children: Vec::new(),
                        visits: 0,
                        value_sum: 0.0,
                        depth: n.depth + 1,
                    });
                    tree.nodes[node].children.push(child);
                    path.push(child);
                    if !t.terminal {
                        ret += uniform_rollout(sim, self.params.rollout_length, allowance - steps, rng)?.reward;
                    }
                    break;
                }
                let child = tree.select_child(node, self.params.uct_c);
                let t = sim.step(&tree.nodes[child].action)?;
                steps += 1;
                ret += t.reward;
                node = child;
                path.push(child);
            }

            for &i in &path {
                tree.nodes[i].visits += 1;
                tree.nodes[i].value_sum += ret;
            }
            tree.min_return = tree.min_return.min(ret);
            tree.max_return = tree.max_return.max(ret);
            iterations += 1;
            observe(&tree);
        }
        sim.restore(root)?;

        let action = match tree.most_visited_root_child() {
            Some(c) => tree.nodes[c].action.clone(),
            None => uniform_action(dim, rng),
        };
        let result = PlannerResult {
            action,
            env_steps_used: sim.steps_taken() - start,
            graph_shape: Vec::new(),
            iterations,
            graph: None,
        };
        Ok((result, tree))
    }
}

impl Planner for MctsPwPlanner {
    fn kind(&self) -> PlannerKind {
        PlannerKind::MctsPw
    }

    fn plan(
        &mut self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
    ) -> Result<PlannerResult> {
        self.search(sim, root, budget, rng, |_| {}).map(|(r, _)| r)
    }
}
