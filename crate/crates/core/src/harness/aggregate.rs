//! Per-episode CSV rows and their per-configuration summary.
//!
//! Episode CSV columns: `env,planner,budget,seed,return,steps,episode_cap`.
//! Aggregate CSV columns: `env,planner,budget,n,mean,std,min,max`, where `std`
//! is the sample standard deviation (divisor `n - 1`, zero when `n = 1`).

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::EpisodeRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub env: String,
    pub planner: String,
    pub budget: u64,
    pub seed: u64,
    #[serde(rename = "return")]
    pub total_return: f64,
    pub steps: usize,
    pub episode_cap: usize,
}

impl From<&EpisodeRecord> for EpisodeRow {
    fn from(r: &EpisodeRecord) -> Self {
        Self {
            env: r.env.clone(),
            planner: r.planner.to_string(),
            budget: r.budget,
            seed: r.seed,
            total_return: r.total_return,
            steps: r.steps.len(),
            episode_cap: r.episode_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub env: String,
    pub planner: String,
    pub budget: u64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, sample std, min and max of `values`. Order-independent.
pub fn summarize(values: &[f64]) -> (f64, f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, std, v[0], v[v.len() - 1])
}

/// One row per `(env, planner, budget)`, sorted by that key.
pub fn aggregate(rows: &[EpisodeRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, String, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.env.clone(), r.planner.clone(), r.budget)).or_default().push(r.total_return);
    }
    groups
        .into_iter()
        .map(|((env, planner, budget), returns)| {
            let (mean, std, min, max) = summarize(&returns);
            AggregateRow { env, planner, budget, n: returns.len(), mean, std, min, max }
        })
        .collect()
}

pub fn read_episode_csv(path: &Path) -> Result<Vec<EpisodeRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Appends episode rows to a CSV file as they complete.
pub struct EpisodeCsvWriter {
    writer: csv::Writer<File>,
    path: std::path::PathBuf,
}

impl EpisodeCsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { writer: csv::Writer::from_writer(file), path: path.to_path_buf() })
    }

    pub fn write(&mut self, record: &EpisodeRecord) -> Result<()> {
        self.writer.serialize(EpisodeRow::from(record))?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}
