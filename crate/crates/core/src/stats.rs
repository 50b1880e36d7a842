//! Per-node probabilistic models.
//!
//! Every graph node carries two models fitted from its replay memory: a
//! diagonal Gaussian over the states that reached it (used to route a new
//! state to the most likely node of a layer) and a Gaussian action bandit
//! with a single scalar standard deviation (used to sample actions).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to every per-dimension state variance.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Componentwise action bounds shared by every environment.
pub const ACTION_LOW: f64 = -1.0;
pub const ACTION_HIGH: f64 = 1.0;

/// Clamps every component of `action` into the action box in place.
pub fn clamp_action(action: &mut [f64]) {
    for a in action.iter_mut() {
        *a = if a.is_nan() { 0.0 } else { a.clamp(ACTION_LOW, ACTION_HIGH) };
    }
}

/// One transition stored in a node's replay memory.
///
/// `ret` is the undiscounted return of the whole simulated trajectory the
/// transition belongs to, not the one-step reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub ret: f64,
    pub next_state: Vec<f64>,
}

/// Gaussian with a diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGaussian {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl DiagonalGaussian {
    /// Builds a Gaussian, raising every variance to [`VARIANCE_FLOOR`].
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), actual: variance.len() });
        }
        let variance = variance.into_iter().map(|v| v.max(VARIANCE_FLOOR)).collect();
        Ok(Self { mean, variance })
    }

    /// Unit-variance Gaussian centred on `mean`.
    pub fn unit(mean: Vec<f64>) -> Self {
        let variance = vec![1.0; mean.len()];
        Self { mean, variance }
    }

    /// Sample mean and population variance (divisor n) of `states`.
    pub fn fit<S: AsRef<[f64]>>(states: &[S]) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptySample)?.as_ref();
        let dim = first.len();
        let n = states.len() as f64;

        let mut mean = vec![0.0; dim];
        for s in states {
            let s = s.as_ref();
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: s.len() });
            }
            for (m, x) in mean.iter_mut().zip(s) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);

        let mut variance = vec![0.0; dim];
        for s in states {
            for ((v, x), m) in variance.iter_mut().zip(s.as_ref()).zip(&mean) {
                let d = x - m;
                *v += d * d;
            }
        }
        variance.iter_mut().for_each(|v| *v = (*v / n).max(VARIANCE_FLOOR));

        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Log density of `x`: `sum_d -0.5 ln(2 pi var_d) - (x_d - mu_d)^2 / (2 var_d)`.
    pub fn log_likelihood(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), actual: x.len() });
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.variance)
            .map(|((x, m), v)| {
                let d = x - m;
                -0.5 * (two_pi * v).ln() - d * d / (2.0 * v)
            })
            .sum())
    }
}

/// Shrink schedule for the action bandit's scalar standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdSchedule {
    /// Standard deviation of an empty replay.
    pub initial: f64,
    /// Standard deviation once the replay holds `anneal_samples` experiences.
    pub minimum: f64,
    pub anneal_samples: usize,
}

impl Default for StdSchedule {
    fn default() -> Self {
        Self { initial: 0.5, minimum: 0.15, anneal_samples: 100 }
    }
}

impl StdSchedule {
    /// Linear interpolation from `initial` to `minimum` over `anneal_samples`.
    pub fn std_for(&self, replay_len: usize) -> f64 {
        if replay_len >= self.anneal_samples {
            return self.minimum;
        }
        let progress = replay_len as f64 / self.anneal_samples as f64;
        (self.initial - (self.initial - self.minimum) * progress).max(self.minimum)
    }
}

/// Number of elites for a sample of `n` at `ratio`: `ceil(ratio * n)`, at least one.
pub fn elite_count(n: usize, ratio: f64) -> usize {
    if n == 0 {
        return 0;
    }
    ((ratio * n as f64).ceil() as usize).clamp(1, n)
}

/// Indices of the `count` highest scores, best first. Equal scores keep
/// their original order.
pub fn top_indices(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.truncate(count);
    order
}

/// Gaussian action policy with one scalar standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBandit {
    mean: Vec<f64>,
    scalar_std: f64,
    sample_count: usize,
}

impl ActionBandit {
    /// Bandit of a node that has not collected enough experience yet.
    pub fn prior(action_dim: usize, schedule: &StdSchedule) -> Self {
        Self { mean: vec![0.0; action_dim], scalar_std: schedule.initial, sample_count: 0 }
    }

    /// Builds a bandit directly. Used by tests and by callers restoring a dump.
    pub fn from_parts(mut mean: Vec<f64>, scalar_std: f64, sample_count: usize) -> Self {
        clamp_action(&mut mean);
        Self { mean, scalar_std: scalar_std.max(0.0), sample_count }
    }

    /// Refits the bandit to the elite experiences of `replay`.
    ///
    /// The mean is the componentwise average of the elite actions, clamped to
    /// the action box; the scalar std follows `schedule` in `|replay|`.
    pub fn fit(replay: &[Experience], elite_ratio: f64, schedule: &StdSchedule) -> Result<Self> {
        let first = replay.first().ok_or(Error::EmptySample)?;
        if !(elite_ratio > 0.0 && elite_ratio <= 1.0) {
            return Err(Error::InvalidParameter {
                key: "elite_ratio".into(),
                reason: format!("{elite_ratio} is outside (0, 1]"),
            });
        }
        let dim = first.action.len();
        let scores: Vec<f64> = replay.iter().map(|e| e.ret).collect();
        let elites = top_indices(&scores, elite_count(replay.len(), elite_ratio));

        let mut mean = vec![0.0; dim];
        for &i in &elites {
            let action = &replay[i].action;
            if action.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: action.len() });
            }
            for (m, a) in mean.iter_mut().zip(action) {
                *m += a;
            }
        }
        let k = elites.len() as f64;
        mean.iter_mut().for_each(|m| *m /= k);
        clamp_action(&mut mean);

        Ok(Self { mean, scalar_std: schedule.std_for(replay.len()), sample_count: replay.len() })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scalar_std(&self) -> f64 {
        self.scalar_std
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Draws `mean + std * N(0, I)` without clamping.
    pub fn sample_unclamped<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                m + self.scalar_std * z
            })
            .collect()
    }

    /// Draws an action and clamps it to the action box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut action = self.sample_unclamped(rng);
        clamp_action(&mut action);
        action
    }
}
