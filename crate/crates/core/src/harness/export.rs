//! Episode traces (JSON lines) and search-graph dumps (JSON).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{DecisionTelemetry, EpisodeRecord};

#[derive(Serialize)]
struct TraceLine<'a> {
    step: usize,
    state: &'a [f64],
    action: &'a [f64],
    reward: f64,
}

/// Writes one JSON object per decision step.
pub fn export_trace(record: &EpisodeRecord, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (step, s) in record.steps.iter().enumerate() {
        let line = TraceLine { step, state: &s.state, action: &s.action, reward: s.reward };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes the decision's search graph. Returns `false` (and logs a warning)
/// when the planner produced no graph.
pub fn export_graph(telemetry: &DecisionTelemetry, path: &Path) -> Result<bool> {
    let Some(graph) = &telemetry.graph else {
        log::warn!("no search graph recorded; skipping {}", path.display());
        return Ok(false);
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, graph)?;
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(true)
}

/// File stem shared by an episode's trace and graph files.
pub fn episode_stem(record: &EpisodeRecord) -> String {
    let env = Path::new(&record.env).file_stem().and_then(|s| s.to_str()).unwrap_or("env");
    format!("{}_{}_b{}_seed{}", env, record.planner, record.budget, record.seed)
}
