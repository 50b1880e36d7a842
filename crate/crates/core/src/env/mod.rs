//! Deterministic simulators with snapshot/restore.
//!
//! Planners drive a private copy of the environment: they restore a snapshot
//! of the decision state, simulate, and restore again. Every environment
//! counts its own `step` calls, which is how simulation budgets are audited.

use std::any::Any;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

pub mod kinematics;
pub mod layout;
pub mod navigation;
pub mod quadratic;
pub mod reacher;

pub use kinematics::forward_kinematics;
pub use layout::{Layout, PRESET_NAMES};
pub use navigation::NavigationWorld;
pub use quadratic::QuadraticBandit;
pub use reacher::ReacherArm;

/// Result of one `step` call.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
}

/// Opaque, immutable copy of an environment's dynamic state.
///
/// A snapshot can only be restored into the environment it was taken from
/// or a clone of it.
#[derive(Clone)]
pub struct EnvSnapshot {
    world: WorldId,
    data: Arc<dyn Any + Send + Sync>,
}

impl EnvSnapshot {
    pub fn new<T: Any + Send + Sync>(world: WorldId, data: T) -> Self {
        Self { world, data: Arc::new(data) }
    }

    /// Borrows the payload if it belongs to `world` and has type `T`.
    pub fn payload<T: Any>(&self, world: WorldId) -> Result<&T> {
        if self.world != world {
            return Err(Error::ForeignSnapshot);
        }
        self.data.downcast_ref::<T>().ok_or(Error::ForeignSnapshot)
    }

    pub fn world(&self) -> WorldId {
        self.world
    }
}

impl std::fmt::Debug for EnvSnapshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvSnapshot").field("world", &self.world).finish_non_exhaustive()
    }
}

/// Identity shared by an environment and its clones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WorldId(u64);

impl WorldId {
    pub fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        WorldId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

/// A deterministic episodic simulator.
///
/// Actions live in `[-1, 1]^action_dim`; implementations clamp incoming
/// actions before use.
pub trait Environment: Send {
    fn name(&self) -> &str;

    fn state_dim(&self) -> usize;

    fn action_dim(&self) -> usize;

    /// Starts a new episode and returns the initial state.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    /// Current state.
    fn observe(&self) -> Vec<f64>;

    fn is_terminal(&self) -> bool;

    /// Decision steps left before the episode cap.
    fn remaining_steps(&self) -> usize;

    fn step(&mut self, action: &[f64]) -> Result<Transition>;

    fn snapshot(&self) -> EnvSnapshot;

    fn restore(&mut self, snapshot: &EnvSnapshot) -> Result<()>;

    /// Total `step` calls made on this instance. Not affected by `restore`.
    fn steps_taken(&self) -> u64;

    fn boxed_clone(&self) -> Box<dyn Environment>;
}

impl Clone for Box<dyn Environment> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

/// Loads a named preset or a JSON layout file.
pub fn load_environment(name_or_path: &str) -> Result<Box<dyn Environment>> {
    if let Some(env) = layout::build_preset(name_or_path) {
        return env;
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        let layout = Layout::load(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(name_or_path).to_string();
        return layout.build(&name);
    }
    Err(Error::UnknownEnvironment(name_or_path.to_string()))
}

pub(crate) fn check_action_dim(expected: usize, action: &[f64]) -> Result<()> {
    if action.len() != expected {
        return Err(Error::DimensionMismatch { expected, actual: action.len() });
    }
    Ok(())
}
