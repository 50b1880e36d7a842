//! Test-side oracles and instruments shared by the integration tests.

#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use cmcgs::env::{EnvSnapshot, Environment, Transition};
use cmcgs::Result;

pub mod invariants;

/// Wraps an environment and counts every `step` call in a counter shared by
/// all clones, independently of the environment's own bookkeeping.
pub struct CountingEnv {
    inner: Box<dyn Environment>,
    count: Arc<AtomicU64>,
}

impl CountingEnv {
    pub fn new(inner: Box<dyn Environment>) -> Self {
        Self { inner, count: Arc::new(AtomicU64::new(0)) }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::SeqCst)
    }
}

impl Environment for CountingEnv {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }
    fn action_dim(&self) -> usize {
        self.inner.action_dim()
    }
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.inner.reset(seed)
    }
    fn observe(&self) -> Vec<f64> {
        self.inner.observe()
    }
    fn is_terminal(&self) -> bool {
        self.inner.is_terminal()
    }
    fn remaining_steps(&self) -> usize {
        self.inner.remaining_steps()
    }
    fn step(&mut self, action: &[f64]) -> Result<Transition> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.inner.step(action)
    }
    fn snapshot(&self) -> EnvSnapshot {
        self.inner.snapshot()
    }
    fn restore(&mut self, snapshot: &EnvSnapshot) -> Result<()> {
        self.inner.restore(snapshot)
    }
    fn steps_taken(&self) -> u64 {
        self.inner.steps_taken()
    }
    fn boxed_clone(&self) -> Box<dyn Environment> {
        Box::new(CountingEnv { inner: self.inner.boxed_clone(), count: Arc::clone(&self.count) })
    }
}

fn sse(points: &[Vec<f64>], members: &[usize]) -> f64 {
    let n = members.len() as f64;
    (0..points[0].len())
        .map(|d| {
            let column: Vec<f64> = members.iter().map(|&i| points[i][d]).collect();
            let mean = column.iter().sum::<f64>() / n;
            column.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Brute-force Ward clustering: repeatedly merges the pair of clusters whose
/// union increases the total within-cluster sum of squares the least,
/// recomputed from the raw points. Clusters are identified by their smallest
/// member; ties go to the lexicographically smallest pair. Returns labels
/// numbered by first appearance.
pub fn brute_force_ward(points: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut union = clusters[a].clone();
                union.extend(&clusters[b]);
                let cost = sse(points, &union) - sse(points, &clusters[a]) - sse(points, &clusters[b]);
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, a, b));
                }
            }
        }
        let (_, a, b) = best.unwrap();
        let absorbed = clusters.remove(b);
        clusters[a].extend(absorbed);
        clusters.sort_by_key(|c| *c.iter().min().unwrap());
    }
    let mut owner = vec![0; points.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            owner[i] = c;
        }
    }
    first_appearance(&owner)
}

pub fn first_appearance(groups: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    groups
        .iter()
        .map(|g| match seen.iter().position(|s| s == g) {
            Some(i) => i,
            None => {
                seen.push(*g);
                seen.len() - 1
            }
        })
        .collect()
}

/// Independent diagonal Gaussian log density, evaluated as the log of a
/// product of one-dimensional densities.
pub fn gaussian_log_density(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut density = 1.0f64;
    for ((x, m), v) in x.iter().zip(mean).zip(var) {
        density *= (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    }
    density.ln()
}

/// Planar chain positions from complex-number rotations.
pub fn rotation_fk(angles: &[f64], lengths: &[f64]) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]];
    let (mut re, mut im) = (1.0f64, 0.0f64);
    let (mut px, mut py) = (0.0, 0.0);
    for (theta, l) in angles.iter().zip(lengths) {
        let (c, s) = (theta.cos(), theta.sin());
        (re, im) = (re * c - im * s, re * s + im * c);
        px += l * re;
        py += l * im;
        out.push([px, py]);
    }
    out
}
