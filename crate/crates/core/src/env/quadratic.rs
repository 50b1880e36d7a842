//! One-step task with reward `-(a - target)^2`.

use crate::env::{check_action_dim, EnvSnapshot, Environment, Transition, WorldId};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QuadraticBandit {
    target: f64,
    world: WorldId,
    done: bool,
    steps_taken: u64,
}

impl QuadraticBandit {
    pub fn new(target: f64) -> Self {
        Self { target, world: WorldId::fresh(), done: false, steps_taken: 0 }
    }

    pub fn target(&self) -> f64 {
        self.target
    }
}

impl Environment for QuadraticBandit {
    fn name(&self) -> &str {
        crate::env::layout::QUADRATIC
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.done = false;
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        vec![if self.done { 1.0 } else { 0.0 }]
    }

    fn is_terminal(&self) -> bool {
        self.done
    }

    fn remaining_steps(&self) -> usize {
        usize::from(!self.done)
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.done {
            return Err(Error::EpisodeTerminated);
        }
        check_action_dim(1, action)?;
        self.steps_taken += 1;
        let a = action[0].clamp(-1.0, 1.0);
        self.done = true;
        Ok(Transition { state: self.observe(), reward: -(a - self.target).powi(2), terminal: true })
    }

    fn snapshot(&self) -> EnvSnapshot {
        EnvSnapshot::new(self.world, self.done)
    }

    fn restore(&mut self, snapshot: &EnvSnapshot) -> Result<()> {
        self.done = *snapshot.payload::<bool>(self.world)?;
        Ok(())
    }

    fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    fn boxed_clone(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}
