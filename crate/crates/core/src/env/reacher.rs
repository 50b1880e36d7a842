//! Planar multi-link reacher with pole obstacles and a sparse goal reward.

use crate::env::kinematics::{forward_kinematics, segments_intersect, wrap_angle};
use crate::env::layout::{ReacherLayout, Segment};
use crate::env::{check_action_dim, EnvSnapshot, Environment, Transition, WorldId};
use crate::error::{Error, Result};

/// Largest joint rotation per decision step, in radians.
pub const MAX_JOINT_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
struct ArmState {
    angles: Vec<f64>,
    step: usize,
    terminal: bool,
}

#[derive(Debug, Clone)]
pub struct ReacherArm {
    name: String,
    layout: ReacherLayout,
    link_lengths: Vec<f64>,
    world: WorldId,
    state: ArmState,
    steps_taken: u64,
}

impl ReacherArm {
    pub fn new(name: impl Into<String>, layout: ReacherLayout) -> Result<Self> {
        layout.validate()?;
        let n = layout.links;
        let state = ArmState { angles: vec![0.0; n], step: 0, terminal: false };
        Ok(Self {
            name: name.into(),
            link_lengths: vec![1.0 / n as f64; n],
            layout,
            world: WorldId::fresh(),
            state,
            steps_taken: 0,
        })
    }

    pub fn layout(&self) -> &ReacherLayout {
        &self.layout
    }

    pub fn joints(&self) -> Vec<[f64; 2]> {
        forward_kinematics(&self.state.angles, &self.link_lengths)
    }

    pub fn end_effector(&self) -> [f64; 2] {
        *self.joints().last().expect("arm has at least one link")
    }

    /// Whether any link of the configuration touches a pole.
    pub fn collides(&self, angles: &[f64]) -> bool {
        arm_hits_poles(&forward_kinematics(angles, &self.link_lengths), &self.layout.poles)
    }
}

pub(crate) fn arm_hits_poles(joints: &[[f64; 2]], poles: &[Segment]) -> bool {
    joints.windows(2).any(|link| poles.iter().any(|p| segments_intersect(link[0], link[1], [p.x0, p.y0], [p.x1, p.y1])))
}

impl Environment for ReacherArm {
    fn name(&self) -> &str {
        &self.name
    }

    fn state_dim(&self) -> usize {
        self.layout.links
    }

    fn action_dim(&self) -> usize {
        self.layout.links
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.state = ArmState { angles: vec![0.0; self.layout.links], step: 0, terminal: false };
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        self.state.angles.clone()
    }

    fn is_terminal(&self) -> bool {
        self.state.terminal
    }

    fn remaining_steps(&self) -> usize {
        if self.state.terminal {
            0
        } else {
            self.layout.max_steps - self.state.step
        }
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        if self.state.terminal {
            return Err(Error::EpisodeTerminated);
        }
        check_action_dim(self.layout.links, action)?;
        self.steps_taken += 1;

        let candidate: Vec<f64> = self
            .state
            .angles
            .iter()
            .zip(action)
            .map(|(theta, a)| {
                let a = if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) };
                wrap_angle(theta + a * MAX_JOINT_STEP)
            })
            .collect();
        if !self.collides(&candidate) {
            self.state.angles = candidate;
        }

        let tip = self.end_effector();
        let reached = self.layout.goal.contains(tip[0], tip[1]);
        self.state.step += 1;
        self.state.terminal = reached || self.state.step >= self.layout.max_steps;
        Ok(Transition {
            state: self.state.angles.clone(),
            reward: if reached { 1.0 } else { 0.0 },
            terminal: self.state.terminal,
        })
    }

    fn snapshot(&self) -> EnvSnapshot {
        EnvSnapshot::new(self.world, self.state.clone())
    }

    fn restore(&mut self, snapshot: &EnvSnapshot) -> Result<()> {
        self.state = snapshot.payload::<ArmState>(self.world)?.clone();
        Ok(())
    }

    fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    fn boxed_clone(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}
