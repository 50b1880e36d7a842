use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmcgs::harness::{
    aggregate, export::episode_stem, export_graph, export_trace, parse_seeds, read_episode_csv, run_experiment,
    write_aggregate_csv, EpisodeCsvWriter, ExperimentConfig,
};
use cmcgs::params::Hyperparameters;
use cmcgs::planner::PlannerKind;
use cmcgs::{Error, Result};

#[derive(Parser)]
#[command(name = "cmcgs", version, about = "Budgeted continuous planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes for one environment, planner and budget.
    Run {
        /// Preset name or layout JSON file.
        #[arg(long)]
        env: String,
        /// cmcgs | cem | mcts-pw | random
        #[arg(long)]
        planner: PlannerKind,
        /// Simulation steps per decision.
        #[arg(long)]
        budget: u64,
        /// Seed count N (seeds 0..N) or a comma-separated list.
        #[arg(long, default_value = "10")]
        seeds: String,
        /// Flat key/value TOML file with hyperparameter overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Per-episode CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Directory for JSON-lines episode traces.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Directory for per-decision search graph dumps.
        #[arg(long = "dump-graph")]
        dump_graph: Option<PathBuf>,
    },
    /// Summarize per-episode CSVs into mean/std per (env, planner, budget).
    Aggregate {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create_dir(path: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Io { path: path.clone(), source: e })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { env, planner, budget, seeds, config, out, trace, dump_graph } => {
            let mut cfg = ExperimentConfig::new(env, planner, budget, parse_seeds(&seeds)?);
            if let Some(path) = &config {
                cfg.overrides = Hyperparameters::read_overrides(path)?;
            }
            cfg.out = Some(out.clone());
            cfg.trace_dir = trace;
            cfg.graph_dir = dump_graph;
            cfg.validate()?;
            for dir in cfg.trace_dir.iter().chain(cfg.graph_dir.iter()) {
                create_dir(dir)?;
            }

            let mut writer = EpisodeCsvWriter::create(&out)?;
            let records = run_experiment(&cfg, |record| {
                writer.write(record)?;
                let stem = episode_stem(record);
                if let Some(dir) = &cfg.trace_dir {
                    export_trace(record, &dir.join(format!("{stem}.jsonl")))?;
                }
                if let Some(dir) = &cfg.graph_dir {
                    for (t, telemetry) in record.telemetry.iter().enumerate() {
                        if !export_graph(telemetry, &dir.join(format!("{stem}_t{t:03}.json")))? {
                            break;
                        }
                    }
                }
                log::info!("seed {}: return {:.4} in {} steps", record.seed, record.total_return, record.steps.len());
                Ok(())
            })?;
            let returns: Vec<f64> = records.iter().map(|r| r.total_return).collect();
            let (mean, std, _, _) = aggregate::summarize(&returns);
            println!(
                "{} {} budget {}: mean {:.4} std {:.4} over {} seeds",
                cfg.env,
                cfg.planner,
                cfg.budget,
                mean,
                std,
                returns.len()
            );
        }
        Command::Aggregate { inputs, out } => {
            let mut rows = Vec::new();
            for path in &inputs {
                rows.extend(read_episode_csv(path)?);
            }
            let table = aggregate(&rows);
            write_aggregate_csv(&out, &table)?;
            println!("wrote {} rows to {}", table.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
