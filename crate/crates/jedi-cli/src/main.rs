use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jedi_cli::runner::{run_experiment, RunOptions};
use jedi_cli::workers::worker_count;
use jedi_cli::CliError;

/// Behavior-guided policy search: surrogate-steered evolution strategies
/// with MAP-Elites and restart-ES baselines.
#[derive(Parser)]
#[command(name = "jedi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment for every seed.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare result directories against the first one listed.
    Compare {
        /// Result directories (each containing a manifest.json).
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Report CSV path; a convergence table lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a saved genome in a maze and dump the trajectory.
    Replay {
        #[arg(long)]
        genome: PathBuf,
        #[arg(long)]
        maze: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and export the CVT centroids used for a given (k, seed).
    Centroids {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seeds, out } => {
            let manifest = run_experiment(&RunOptions {
                config_path: config,
                seeds_override: seeds,
                out_override: out,
                workers: worker_count(),
            })?;
            let failed: Vec<u64> = manifest
                .runs
                .iter()
                .filter(|r| r.status != "ok")
                .map(|r| r.seed)
                .collect();
            for run in &manifest.runs {
                println!(
                    "seed {}: {} ({} evaluations, best {})",
                    run.seed,
                    run.status,
                    run.evaluations,
                    run.best_fitness.map(|f| f.to_string()).unwrap_or_default()
                );
            }
            if !failed.is_empty() {
                return Err(CliError::Runtime(format!("seeds failed: {failed:?}")));
            }
            Ok(())
        }
        Command::Compare { dirs, out } => jedi_cli::compare::compare(&dirs, &out),
        Command::Replay { genome, maze, out } => jedi_cli::replay::replay(&genome, &maze, &out),
        Command::Centroids { k, seed, out } => {
            if k == 0 {
                return Err(CliError::Config("--k must be positive".into()));
            }
            let centroids = jedi_core::archive::Centroids::build(k, seed);
            let mut csv = String::from("index,x,y\n");
            for (i, p) in centroids.points().iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", i, p[0], p[1]));
            }
            jedi_cli::output::write_file(&out, &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
