mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;

/// Sequence-pattern mining and pass/fail prediction over programming
/// assignment submission logs.
#[derive(Debug, Parser)]
#[command(name = "assignmine", version)]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed; overrides `learn.seed` (or `seed` for synth).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write sequences.csv (times, order and plagiarism per student).
    Sequences,
    /// Write patterns.csv with fail-predictive patterns per sequence kind.
    Mine,
    /// Write importance.csv and metrics.json.
    Predict,
    /// Write order_vs_grade.csv.
    Report,
    /// Generate a synthetic cohort and a pipeline.cfg for it.
    Synth,
    /// Run sequences, mine, predict and report.
    RunAll,
}

fn pipeline_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_ref().context("--config is required")?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Synth => {
            let path = cli.config.as_ref().context("--config is required")?;
            let out = cli.out.as_ref().context("synth needs --out <dir>")?;
            commands::cmd_synth(path, out, cli.seed)
        }
        Command::Sequences => Ok(vec![commands::cmd_sequences(&pipeline_config(cli)?)?]),
        Command::Mine => Ok(vec![commands::cmd_mine(&pipeline_config(cli)?)?]),
        Command::Predict => commands::cmd_predict(&pipeline_config(cli)?),
        Command::Report => Ok(vec![commands::cmd_report(&pipeline_config(cli)?)?]),
        Command::RunAll => commands::cmd_run_all(&pipeline_config(cli)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
