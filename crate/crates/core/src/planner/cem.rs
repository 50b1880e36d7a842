//! Cross-Entropy Method over open-loop action sequences.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::env::{EnvSnapshot, Environment};
use crate::error::Result;
use crate::params::CemParams;
use crate::planner::{check_plan_inputs, uniform_action, PlanRng, Planner, PlannerKind, PlannerResult};
use crate::stats::{clamp_action, elite_count, top_indices};

/// Per-timestep Gaussian over an action sequence of length `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct CemDistribution {
    horizon: usize,
    action_dim: usize,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl CemDistribution {
    pub fn new(horizon: usize, action_dim: usize, init_std: f64) -> Self {
        let n = horizon * action_dim;
        Self { horizon, action_dim, means: vec![0.0; n], stds: vec![init_std; n] }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Row-major `horizon x action_dim` means.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn first_action(&self) -> Vec<f64> {
        let mut a = self.means[..self.action_dim].to_vec();
        clamp_action(&mut a);
        a
    }

    /// Draws one clamped action sequence, flattened row-major.
    pub fn sample(&self, rng: &mut PlanRng) -> Vec<f64> {
        let mut seq: Vec<f64> = self
            .means
            .iter()
            .zip(&self.stds)
            .map(|(m, s)| {
                let z: f64 = rng.sample(StandardNormal);
                m + s * z
            })
            .collect();
        clamp_action(&mut seq);
        seq
    }

    /// Refits to the given sequences: elementwise mean and population std,
    /// the std floored at `std_floor`.
    pub fn refit(&mut self, elites: &[&[f64]], std_floor: f64) {
        let k = elites.len() as f64;
        for i in 0..self.means.len() {
            let mean = elites.iter().map(|e| e[i]).sum::<f64>() / k;
            let var = elites.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / k;
            self.means[i] = mean;
            self.stds[i] = var.sqrt().max(std_floor);
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CemPlanner {
    params: CemParams,
}

impl CemPlanner {
    pub fn new(params: CemParams) -> Self {
        Self { params }
    }

    /// Runs the optimisation and returns the final distribution with the result.
    pub fn optimize(
        &self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
    ) -> Result<(PlannerResult, CemDistribution)> {
        check_plan_inputs(sim, root, budget)?;
        let start = sim.steps_taken();
        let horizon = self.params.horizon.min(sim.remaining_steps()).max(1);
        let dim = sim.action_dim();
        let mut dist = CemDistribution::new(horizon, dim, self.params.init_std);
        let per_generation = (self.params.population * horizon) as u64;

        if budget < horizon as u64 {
            let result = PlannerResult {
                action: uniform_action(dim, rng),
                env_steps_used: 0,
                graph_shape: Vec::new(),
                iterations: 0,
                graph: None,
            };
            return Ok((result, dist));
        }

        let mut generations = 0;
        loop {
            let used = sim.steps_taken() - start;
            let population = if used + per_generation <= budget {
                self.params.population
            } else if generations == 0 {
                // Budgets below one full generation get a single reduced one.
                ((budget - used) / horizon as u64) as usize
            } else {
                break;
            };
            if population == 0 {
                break;
            }

            let samples: Vec<Vec<f64>> = (0..population).map(|_| dist.sample(rng)).collect();
            let mut returns = Vec::with_capacity(population);
            for seq in &samples {
                sim.restore(root)?;
                let mut total = 0.0;
                for action in seq.chunks(dim) {
                    let t = sim.step(action)?;
                    total += t.reward;
                    if t.terminal {
                        break;
                    }
                }
                returns.push(total);
            }
            let elites: Vec<&[f64]> = top_indices(&returns, elite_count(population, self.params.elite_fraction))
                .into_iter()
                .map(|i| samples[i].as_slice())
                .collect();
            dist.refit(&elites, self.params.std_floor);
            generations += 1;
        }
        sim.restore(root)?;

        let result = PlannerResult {
            action: dist.first_action(),
            env_steps_used: sim.steps_taken() - start,
            graph_shape: Vec::new(),
            iterations: generations,
            graph: None,
        };
        Ok((result, dist))
    }
}

impl Planner for CemPlanner {
    fn kind(&self) -> PlannerKind {
        PlannerKind::Cem
    }

    fn plan(
        &mut self,
        sim: &mut dyn Environment,
        root: &EnvSnapshot,
        budget: u64,
        rng: &mut PlanRng,
    ) -> Result<PlannerResult> {
        self.optimize(sim, root, budget, rng).map(|(r, _)| r)
    }
}
