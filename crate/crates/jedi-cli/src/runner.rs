//! The `run` command: execute a configured method for every seed, writing
//! per-seed metrics/archive/genome files and one manifest. Seeds run in
//! parallel on the worker pool; a failed seed is recorded in the manifest
//! while the others proceed.

use std::path::{Path, PathBuf};
use std::time::Instant;

use jedi_core::archive::Centroids;
use jedi_core::env::Evaluator;
use jedi_core::methods::{es_search_run, jedi_run, map_elites_run, RunResult};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Method};
use crate::output::{self, Manifest, ManifestRun};
use crate::workers::{build_pool, ParallelEvaluator};
use crate::CliError;

pub struct RunOptions {
    pub config_path: PathBuf,
    pub seeds_override: Option<Vec<u64>>,
    pub out_override: Option<PathBuf>,
    pub workers: usize,
}

pub fn run_experiment(opts: &RunOptions) -> Result<Manifest, CliError> {
    let mut config = crate::config::load(&opts.config_path)?;
    if let Some(seeds) = &opts.seeds_override {
        if seeds.is_empty() {
            return Err(CliError::Config("--seeds: must not be empty".into()));
        }
        config.seeds = seeds.clone();
    }
    if let Some(out) = &opts.out_override {
        config.output_dir = out.clone();
    }
    let base = opts
        .config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    execute(&config, &base, opts.workers)
}

/// Run a resolved config. Maze paths resolve relative to `base`.
pub fn execute(
    config: &ExperimentConfig,
    base: &Path,
    workers: usize,
) -> Result<Manifest, CliError> {
    let evaluator = config.build_evaluator(base)?;
    let dim = evaluator.genome_len();
    let centroids = Centroids::build(config.centroids, config.centroids_seed);

    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| CliError::io("creating output directory", e))?;

    let pool = build_pool(workers)?;
    let method = config.method.name();
    let records: Vec<Result<ManifestRun, CliError>> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| run_seed(config, &*evaluator, &centroids, dim, seed))
            .collect()
    });

    let mut runs = Vec::with_capacity(records.len());
    for r in records {
        runs.push(r?);
    }
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        method: method.to_string(),
        env: config.env.to_config_string(),
        config_hash: config.hash(),
        seeds: config.seeds.clone(),
        config: config.to_toml(),
        runs,
    };
    manifest.save(&config.output_dir)?;
    Ok(manifest)
}

fn run_seed(
    config: &ExperimentConfig,
    evaluator: &dyn Evaluator,
    centroids: &Centroids,
    dim: usize,
    seed: u64,
) -> Result<ManifestRun, CliError> {
    let parallel = ParallelEvaluator::new(evaluator);
    let started = Instant::now();
    let outcome: Result<RunResult, _> = match config.method {
        Method::Jedi => jedi_run(&config.jedi_config(dim), &parallel, centroids.clone(), seed),
        Method::MapElites => {
            map_elites_run(&config.map_elites_config(), &parallel, centroids.clone(), seed)
        }
        Method::Es | Method::EsRestart => {
            es_search_run(&config.es_search_config(dim), &parallel, centroids.clone(), seed)
        }
    };
    let wall_ms = started.elapsed().as_millis() as u64;
    let method = config.method.name();
    let (metrics_file, archive_file, genome_file) = output::seed_file_names(method, seed);
    match outcome {
        Ok(result) => {
            output::write_seed_artifacts(&config.output_dir, method, seed, &result)?;
            Ok(ManifestRun {
                seed,
                status: "ok".into(),
                evaluations: result.evaluations_used,
                best_fitness: Some(result.best_result.fitness),
                reached_target: Some(result.best_result.reached_target),
                restarts: result.restarts,
                wall_ms,
                metrics_file,
                archive_file,
                genome_file,
            })
        }
        Err(e) => Ok(ManifestRun {
            seed,
            status: format!("failed: {e}"),
            evaluations: 0,
            best_fitness: None,
            reached_target: None,
            restarts: 0,
            wall_ms,
            metrics_file: String::new(),
            archive_file: String::new(),
            genome_file: String::new(),
        }),
    }
}
