//! Particle navigation between obstacles.
//!
//! The particle moves rightwards at a constant horizontal speed. One action is
//! applied per segment between consecutive decision lines; it sets the
//! vertical displacement over that segment. Motion is integrated in
//! substeps, and a substep that would end inside an obstacle drops its
//! vertical component and flags a collision.

use crate::env::layout::{Disc, NavigationLayout};
use crate::env::{check_action_dim, EnvSnapshot, Environment, Transition, WorldId};
use crate::error::{Error, Result};

pub const SUBSTEPS: usize = 10;
pub const MAX_VERTICAL_STEP: f64 = 0.15;
pub const PROGRESS_WEIGHT: f64 = 1.0;
pub const ACTION_WEIGHT: f64 = 0.01;
pub const COLLISION_WEIGHT: f64 = 0.5;
pub const GOAL_BONUS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
struct NavState {
    x: f64,
    y: f64,
    step: usize,
    terminal: bool,
}

#[derive(Debug, Clone)]
pub struct NavigationWorld {
    name: String,
    layout: NavigationLayout,
    world: WorldId,
    state: NavState,
    steps_taken: u64,
}

impl NavigationWorld {
    /// Builds the world from a validated layout.
    pub fn new(name: impl Into<String>, layout: NavigationLayout) -> Result<Self> {
        layout.validate()?;
        let state = NavState { x: layout.start.x, y: layout.start.y, step: 0, terminal: false };
        Ok(Self { name: name.into(), layout, world: WorldId::fresh(), state, steps_taken: 0 })
    }

    pub fn layout(&self) -> &NavigationLayout {
        &self.layout
    }

    /// Horizontal distance covered per decision step.
    pub fn segment_width(&self) -> f64 {
        (1.0 - self.layout.start.x) / self.layout.decision_lines as f64
    }

    pub fn goal(&self) -> &Disc {
        &self.layout.goal
    }

    fn goal_distance(&self, x: f64, y: f64) -> f64 {
        (x - self.layout.goal.cx).hypot(y - self.layout.goal.cy)
    }
}

impl Environment for NavigationWorld {
    fn name(&self) -> &str {
        &self.name
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.state = NavState { x: self.layout.start.x, y: self.layout.start.y, step: 0, terminal: false };
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        vec![self.state.x, self.state.y]
    }

    fn is_terminal(&self) -> bool {
        self.state.terminal
    }

    fn remaining_steps(&self) -> usize {
        if self.state.terminal {
            0
        } else {
            self.layout.decision_lines - self.state.step
        }
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.state.terminal {
            return Err(Error::EpisodeTerminated);
        }
        check_action_dim(1, action)?;
        self.steps_taken += 1;

        let a = if action[0].is_nan() { 0.0 } else { action[0].clamp(-1.0, 1.0) };
        let dx = self.segment_width() / SUBSTEPS as f64;
        let dy = a * MAX_VERTICAL_STEP / SUBSTEPS as f64;
        let (mut x, mut y) = (self.state.x, self.state.y);
        let d_prev = self.goal_distance(x, y);
        let mut collided = false;
        let mut reached = false;

        for _ in 0..SUBSTEPS {
            let nx = (x + dx).clamp(0.0, 1.0);
            let mut ny = (y + dy).clamp(0.0, 1.0);
            if self.layout.blocked(nx, ny) {
                ny = y;
                collided = true;
            }
            x = nx;
            y = ny;
            if self.layout.goal.contains(x, y) {
                reached = true;
                break;
            }
        }

        let d_new = self.goal_distance(x, y);
        let mut reward = PROGRESS_WEIGHT * (d_prev - d_new) - ACTION_WEIGHT * a * a;
        if collided {
            reward -= COLLISION_WEIGHT;
        }
        if reached {
            reward += GOAL_BONUS;
        }
        let step = self.state.step + 1;
        let terminal = reached || step >= self.layout.decision_lines;
        self.state = NavState { x, y, step, terminal };
        Ok(Transition { state: vec![x, y], reward, terminal })
    }

    fn snapshot(&self) -> EnvSnapshot {
        EnvSnapshot::new(self.world, self.state)
    }

    fn restore(&mut self, snapshot: &EnvSnapshot) -> Result<()> {
        self.state = *snapshot.payload::<NavState>(self.world)?;
        Ok(())
    }

    fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    fn boxed_clone(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}
