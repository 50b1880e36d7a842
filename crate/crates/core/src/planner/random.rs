use crate::env::{EnvSnapshot, Environment};
use crate::error::Result;
use crate::planner::{uniform_action, PlanRng, Planner, PlannerKind, PlannerResult};

/// Uniform-random control: ignores the simulator and spends no budget.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPlanner;

impl Planner for RandomPlanner {
    fn kind(&self) -> PlannerKind {
        PlannerKind::Random
    }

    fn plan(
        &mut self,
        sim: &mut dyn Environment,
        _root: &EnvSnapshot,
        _budget: u64,
        rng: &mut PlanRng,
    ) -> Result<PlannerResult> {
        Ok(PlannerResult {
            action: uniform_action(sim.action_dim(), rng),
            env_steps_used: 0,
            graph_shape: Vec::new(),
            iterations: 0,
            graph: None,
        })
    }
}
