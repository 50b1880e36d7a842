//! Ward agglomerative clustering of replay states.
//!
//! Clusters are identified by the index of their lowest original point; a
//! merge of clusters `a < b` keeps id `a`. The pair merged at each step is the
//! one with the smallest Ward cost, ties going to the lexicographically
//! smallest `(a, b)`. The Ward cost of two clusters is the increase in
//! within-cluster sum of squares caused by merging them,
//! `|A||B| / (|A| + |B|) * |c_A - c_B|^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Experience;

/// Flat cluster labels for a set of points.
///
/// Labels are numbered by first appearance, so point 0 always has label 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    /// Canonicalizes arbitrary group ids into first-appearance labels.
    pub fn from_groups(groups: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let labels: Vec<usize> = groups
            .iter()
            .map(|g| {
                let next = remap.len();
                *remap.entry(*g).or_insert(next)
            })
            .collect();
        Self { labels, k: remap.len() }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of points carrying each label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Point indices grouped by label.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }
}

/// One agglomeration step: cluster `absorbed` is merged into `kept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub kept: usize,
    pub absorbed: usize,
    pub cost: f64,
}

/// The full Ward merge sequence of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    points: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Runs Ward agglomeration to a single cluster.
    pub fn ward<S: AsRef<[f64]>>(points: &[S]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Ok(Self { points: 0, merges: Vec::new() });
        }
        let dim = points[0].as_ref().len();
        if let Some(bad) = points.iter().find(|p| p.as_ref().len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.as_ref().len() });
        }

        // Upper-triangular cost matrix, cost[i * n + j] valid for i < j.
        let mut cost = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d2: f64 = points[i].as_ref().iter().zip(points[j].as_ref()).map(|(a, b)| (a - b) * (a - b)).sum();
                cost[i * n + j] = 0.5 * d2;
            }
        }
        let at = |cost: &[f64], a: usize, b: usize| {
            if a < b {
                cost[a * n + b]
            } else {
                cost[b * n + a]
            }
        };

        let mut active = vec![true; n];
        let mut size = vec![1usize; n];
        // Best partner j > i for every row i.
        let mut nn = vec![usize::MAX; n];
        let mut nn_cost = vec![f64::INFINITY; n];
        let refresh = |row: usize, cost: &[f64], active: &[bool], nn: &mut [usize], nn_cost: &mut [f64]| {
            nn[row] = usize::MAX;
            nn_cost[row] = f64::INFINITY;
            for j in row + 1..n {
                if active[j] && (nn[row] == usize::MAX || cost[row * n + j] < nn_cost[row]) {
                    nn[row] = j;
                    nn_cost[row] = cost[row * n + j];
                }
            }
        };
        for i in 0..n {
            refresh(i, &cost, &active, &mut nn, &mut nn_cost);
        }

        let mut merges = Vec::with_capacity(n - 1);
        for _ in 1..n {
            let mut best: Option<usize> = None;
            for i in 0..n {
                if !active[i] || nn[i] == usize::MAX {
                    continue;
                }
                match best {
                    Some(b) if nn_cost[i] >= nn_cost[b] => {}
                    _ => best = Some(i),
                }
            }
            let a = best.expect("at least two active clusters");
            let b = nn[a];
            let merge_cost = nn_cost[a];
            merges.push(Merge { kept: a, absorbed: b, cost: merge_cost });

            let (na, nb) = (size[a] as f64, size[b] as f64);
            for k in 0..n {
                if !active[k] || k == a || k == b {
                    continue;
                }
                let nk = size[k] as f64;
                let updated =
                    ((nk + na) * at(&cost, k, a) + (nk + nb) * at(&cost, k, b) - nk * merge_cost) / (nk + na + nb);
                if k < a {
                    cost[k * n + a] = updated;
                } else {
                    cost[a * n + k] = updated;
                }
            }
            active[b] = false;
            size[a] += size[b];

            refresh(a, &cost, &active, &mut nn, &mut nn_cost);
            for i in 0..n {
                if !active[i] || i == a {
                    continue;
                }
                if nn[i] == a || nn[i] == b {
                    refresh(i, &cost, &active, &mut nn, &mut nn_cost);
                } else if i < a && nn[i] != usize::MAX {
                    let c = cost[i * n + a];
                    if c < nn_cost[i] || (c == nn_cost[i] && a < nn[i]) {
                        nn[i] = a;
                        nn_cost[i] = c;
                    }
                }
            }
        }

        Ok(Self { points: n, merges })
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Flat partition with exactly `k` clusters.
    pub fn cut(&self, k: usize) -> Result<ClusterAssignment> {
        if k == 0 || k > self.points {
            return Err(Error::NotEnoughPoints { points: self.points, k });
        }
        let mut parent: Vec<usize> = (0..self.points).collect();
        for m in &self.merges[..self.points - k] {
            parent[m.absorbed] = m.kept;
        }
        fn root(parent: &[usize], mut i: usize) -> usize {
            while parent[i] != i {
                i = parent[i];
            }
            i
        }
        let groups: Vec<usize> = (0..self.points).map(|i| root(&parent, i)).collect();
        Ok(ClusterAssignment::from_groups(&groups))
    }
}

/// Ward agglomerative clustering of `points` into `k` clusters.
pub fn agglomerative_cluster<S: AsRef<[f64]>>(points: &[S], k: usize) -> Result<ClusterAssignment> {
    if k == 0 || k > points.len() {
        return Err(Error::NotEnoughPoints { points: points.len(), k });
    }
    Dendrogram::ward(points)?.cut(k)
}

/// Controls when and how a layer may be widened.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPolicy {
    /// Pooled experiences per additional desired cluster.
    pub n_split: usize,
    /// Maximum number of nodes in a layer.
    pub c_max: usize,
    /// Minimum number of experiences every new cluster must hold.
    pub m_min: usize,
}

impl Default for SplitPolicy {
    fn default() -> Self {
        Self { n_split: 20, c_max: 8, m_min: 4 }
    }
}

impl SplitPolicy {
    /// `min(c_max, 1 + floor(size / n_split))`.
    pub fn desired_cluster_count(&self, layer_replay_size: usize) -> usize {
        let n_split = self.n_split.max(1);
        (1 + layer_replay_size / n_split).min(self.c_max.max(1))
    }
}

/// Why a split attempt was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitFailure {
    TooFewPoints { points: usize, k: usize },
    UndersizedCluster { size: usize, m_min: usize },
}

/// Accepts a partition only if every cluster holds at least `m_min` points.
pub fn check_split(assignment: ClusterAssignment, m_min: usize) -> Result<ClusterAssignment, SplitFailure> {
    match assignment.sizes().into_iter().min() {
        Some(size) if size < m_min => Err(SplitFailure::UndersizedCluster { size, m_min }),
        _ => Ok(assignment),
    }
}

/// Clusters the states of `experiences` into `target_k` groups.
pub fn try_split_layer(
    experiences: &[&Experience],
    target_k: usize,
    m_min: usize,
) -> Result<ClusterAssignment, SplitFailure> {
    if target_k == 0 || experiences.len() < target_k {
        return Err(SplitFailure::TooFewPoints { points: experiences.len(), k: target_k });
    }
    let states: Vec<&[f64]> = experiences.iter().map(|e| e.state.as_slice()).collect();
    let assignment = agglomerative_cluster(&states, target_k)
        .map_err(|_| SplitFailure::TooFewPoints { points: experiences.len(), k: target_k })?;
    check_split(assignment, m_min)
}
