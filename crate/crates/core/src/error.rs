use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planners, environments and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot fit distribution to empty sample")]
    EmptySample,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("not enough points: {points} points cannot form {k} clusters")]
    NotEnoughPoints { points: usize, k: usize },

    #[error("planner produced no experience")]
    NoExperience,

    #[error("step called on a terminal episode")]
    EpisodeTerminated,

    #[error("snapshot does not belong to this environment")]
    ForeignSnapshot,

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),

    #[error("unknown planner `{0}`")]
    UnknownPlanner(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("budget overrun: used {used} steps with budget {budget}")]
    BudgetOverrun { used: u64, budget: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
