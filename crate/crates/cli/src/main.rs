//! Experiment runner: parse a config, execute the state-preparation
//! pipeline, and emit reproducible CSV/JSON artifacts.

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use pipeline::Stage;

#[derive(Parser)]
#[command(
    name = "spinprep",
    version,
    about = "Symmetry-projected variational state preparation for spin models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: initial state, spin-zero projection, VQE,
    /// optional symmetrization, oracle analysis.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output.directory or "out").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated stage subset: init,project,vqe,symmetrize.
        #[arg(long)]
        stages: Option<String>,
    },
    /// Compute symmetry-sector dimensions and lowest energies (lattice model).
    Census {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config against every invariant without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run independent pipelines over a seed list (SPINPREP_WORKERS controls
    /// parallelism).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the base seed for derived seed lists.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stages: Option<String>,
    },
}

fn out_dir(config: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| config.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn stage_set(flag: Option<String>) -> Result<std::collections::BTreeSet<Stage>> {
    match flag {
        Some(list) => Stage::parse_list(&list),
        None => Ok(Stage::all()),
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            stages,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = Some(seed);
            }
            let dir = out_dir(&config, out);
            let stages = stage_set(stages)?;
            let manifest = pipeline::run_pipeline(&config, &dir, &stages)?;
            println!(
                "wrote {} (stages: {})",
                dir.join("manifest.json").display(),
                manifest
                    .stages
                    .iter()
                    .map(|s| s.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        Command::Census { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let dir = out_dir(&config, out);
            pipeline::run_census(&config, &dir)?;
            println!("wrote {}", dir.join("census.json").display());
        }
        Command::Validate { config } => {
            let config = ExperimentConfig::load(&config)?;
            let violations = config.validate();
            if violations.is_empty() {
                println!("config ok: no violations");
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
                anyhow::bail!("{} violation(s)", violations.len());
            }
        }
        Command::Sweep {
            config,
            out,
            seed,
            stages,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                config.seed = Some(seed);
            }
            let dir = out_dir(&config, out);
            let stages = stage_set(stages)?;
            let summary = pipeline::run_sweep(&config, &dir, &stages)?;
            println!(
                "wrote {} ({} runs)",
                dir.join("sweep_summary.json").display(),
                summary.runs.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
