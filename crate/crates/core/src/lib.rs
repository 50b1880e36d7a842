//! # cmcgs
//!
//! Continuous Monte Carlo Graph Search (CMCGS) for decision-time planning in
//! continuous state and action spaces, with two comparison planners (the
//! Cross-Entropy Method and MCTS with progressive widening), a uniform-random
//! control, and deterministic 2D benchmark environments.
//!
//! ```no_run
//! use cmcgs::env::load_environment;
//! use cmcgs::planner::{CmcgsPlanner, PlanRng, Planner};
//! use rand::SeedableRng;
//!
//! let mut env = load_environment("2d-navigation-circles").unwrap();
//! env.reset(0);
//! let mut sim = env.boxed_clone();
//! let mut rng = PlanRng::seed_from_u64(0);
//! let mut planner = CmcgsPlanner::default();
//! while !env.is_terminal() {
//!     let snapshot = env.snapshot();
//!     let result = planner.plan(sim.as_mut(), &snapshot, 300, &mut rng).unwrap();
//!     env.step(&result.action).unwrap();
//! }
//! ```

pub mod cluster;
pub mod env;
pub mod error;
pub mod harness;
pub mod params;
pub mod planner;
pub mod stats;

pub use error::{Error, Result};
