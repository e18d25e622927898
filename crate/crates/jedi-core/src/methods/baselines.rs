//! Baselines: MAP-Elites with iso+line variation, and a single raw-fitness
//! ES with an optional convergence-triggered restart. Both log every
//! evaluation into a repertoire so coverage is comparable across methods.

use alloc::vec::Vec;

use crate::archive::{Centroids, Repertoire};
use crate::env::Evaluator;
use crate::es::{EsConfig, EsState, RestartMonitor};
use crate::{rng, Genome};

use rand::Rng;
use rand_distr::StandardNormal;

use super::{random_genome, seed_archive, Recorder, RunError, RunResult};

#[derive(Debug, Clone)]
pub struct MapElitesConfig {
    pub n_init: usize,
    /// Offspring per generation.
    pub batch: usize,
    pub iso_sigma: f64,
    pub line_sigma: f64,
    pub eval_budget: u64,
}

impl Default for MapElitesConfig {
    fn default() -> Self {
        MapElitesConfig {
            n_init: 128,
            batch: 64,
            iso_sigma: 0.2,
            line_sigma: 0.0,
            eval_budget: 100_000,
        }
    }
}

/// MAP-Elites: sample elites uniformly from filled cells, mutate with
/// `x + iso_sigma * g + line_sigma * u * (y - x)`, archive every offspring.
pub fn map_elites_run(
    config: &MapElitesConfig,
    evaluator: &dyn Evaluator,
    centroids: Centroids,
    seed: u64,
) -> Result<RunResult, RunError> {
    if config.n_init == 0 || config.batch == 0 {
        return Err(RunError::Config("n_init and batch must be positive"));
    }
    if config.eval_budget < config.n_init as u64 {
        return Err(RunError::Config("eval_budget smaller than n_init"));
    }
    let dim = evaluator.genome_len();
    let mut rep = Repertoire::new(centroids);
    let mut recorder = Recorder::new(config.eval_budget);

    let mut init_rng = rng::stream(seed, rng::component::INIT, 0, 0);
    seed_archive(config.n_init, evaluator, &mut rep, &mut recorder, &mut init_rng)?;
    recorder.emit(&rep, None, None);

    let mut var_rng = rng::stream(seed, rng::component::VARIATION, 0, 0);
    while recorder.fits(config.batch) {
        let filled: Vec<usize> = rep
            .cells()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.elite.is_some())
            .map(|(i, _)| i)
            .collect();
        let mut offspring: Vec<Genome> = Vec::with_capacity(config.batch);
        for _ in 0..config.batch {
            let parent = rep.cells()[filled[var_rng.gen_range(0..filled.len())]]
                .elite
                .as_ref()
                .expect("filled cell");
            let mut child = parent.genome.clone();
            for c in child.iter_mut() {
                let g: f64 = var_rng.sample(StandardNormal);
                *c += config.iso_sigma * g;
            }
            if config.line_sigma != 0.0 {
                let other = rep.cells()[filled[var_rng.gen_range(0..filled.len())]]
                    .elite
                    .as_ref()
                    .expect("filled cell");
                let u: f64 = var_rng.sample(StandardNormal);
                for (c, (xp, yp)) in child.iter_mut().zip(parent.genome.iter().zip(&other.genome))
                {
                    *c += config.line_sigma * u * (yp - xp);
                }
            }
            debug_assert_eq!(child.len(), dim);
            offspring.push(child);
        }
        let results = evaluator.evaluate_batch(&offspring);
        recorder.count_batch(&offspring, &results);
        for (g, r) in offspring.iter().zip(&results) {
            let _ = rep.add(g, r.fitness, r.descriptor);
        }
        recorder.emit(&rep, None, None);
    }
    recorder.finish(rep, 0)
}

#[derive(Debug, Clone)]
pub struct EsSearchConfig {
    pub es: EsConfig,
    /// Re-initialize from a fresh random genome when the population fitness
    /// has been flat for a full window.
    pub restart: bool,
    pub eval_budget: u64,
}

/// Single ES maximizing raw fitness. All evaluations are logged into a
/// repertoire for coverage reporting only.
pub fn es_search_run(
    config: &EsSearchConfig,
    evaluator: &dyn Evaluator,
    centroids: Centroids,
    seed: u64,
) -> Result<RunResult, RunError> {
    if config.es.dim != evaluator.genome_len() {
        return Err(RunError::Config("es.dim does not match the environment"));
    }
    config.es.validate()?;
    let lambda = config.es.population;
    if config.eval_budget < lambda as u64 {
        return Err(RunError::Config("eval_budget smaller than one population"));
    }
    let mut rep = Repertoire::new(centroids);
    let mut recorder = Recorder::new(config.eval_budget);

    let mut restart_rng = rng::stream(seed, rng::component::RESTART, 0, 0);
    let mut restarts: u64 = 0;
    let mut incarnation: u64 = 0;
    let center = random_genome(config.es.dim, &mut restart_rng);
    let mut es = EsState::new(
        config.es.clone(),
        &center,
        rng::stream(seed, rng::component::EMITTER, incarnation, 0),
    )?;
    let mut monitor = RestartMonitor::default();

    while recorder.fits(lambda) {
        let pop = es.ask();
        let results = evaluator.evaluate_batch(&pop);
        recorder.count_batch(&pop, &results);
        let fitnesses: Vec<f64> = results.iter().map(|r| r.fitness).collect();
        es.tell(&fitnesses)?;
        monitor.record(&fitnesses);
        for (g, r) in pop.iter().zip(&results) {
            let _ = rep.add(g, r.fitness, r.descriptor);
        }
        recorder.emit(&rep, None, None);
        if config.restart && monitor.should_restart() {
            restarts += 1;
            incarnation += 1;
            let center = random_genome(config.es.dim, &mut restart_rng);
            es = EsState::new(
                config.es.clone(),
                &center,
                rng::stream(seed, rng::component::EMITTER, incarnation, 0),
            )?;
            monitor.reset();
        }
    }
    recorder.finish(rep, restarts)
}
