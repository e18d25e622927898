//! Search methods over a shared evaluation/archive substrate: the
//! surrogate-steered ES loop plus the MAP-Elites and (restart-)ES
//! baselines. Every method accounts for each rollout it performs, keeps its
//! best-ever solution, and is bit-reproducible from (config, seed)
//! regardless of how the evaluator parallelizes batches.

mod baselines;
mod jedi;

pub use baselines::{es_search_run, map_elites_run, EsSearchConfig, MapElitesConfig};
pub use jedi::{jedi_run, JediConfig, SelectionMode};

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::archive::{ArchiveError, Repertoire};
use crate::env::{EpisodeResult, Evaluator};
use crate::es::EsError;
use crate::gp::GpError;
use crate::Genome;

/// One metrics sample; `alpha` and `loop_index` are only meaningful for the
/// surrogate-steered method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub evaluations: u64,
    pub best_fitness: f64,
    pub coverage: f64,
    pub alpha: Option<f64>,
    pub loop_index: Option<u64>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub rows: Vec<MetricRow>,
    pub repertoire: Repertoire,
    pub best_genome: Genome,
    pub best_result: EpisodeResult,
    pub evaluations_used: u64,
    /// Restarts taken (restart-ES only; zero elsewhere).
    pub restarts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunError {
    Config(&'static str),
    Es(EsError),
    Gp(GpError),
    Archive(ArchiveError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "configuration error: {msg}"),
            RunError::Es(e) => write!(f, "ES failure: {e}"),
            RunError::Gp(e) => write!(f, "surrogate failure: {e}"),
            RunError::Archive(e) => write!(f, "archive failure: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RunError {}

impl From<EsError> for RunError {
    fn from(e: EsError) -> Self {
        RunError::Es(e)
    }
}

impl From<GpError> for RunError {
    fn from(e: GpError) -> Self {
        RunError::Gp(e)
    }
}

impl From<ArchiveError> for RunError {
    fn from(e: ArchiveError) -> Self {
        RunError::Archive(e)
    }
}

/// Shared bookkeeping: evaluation accounting, best-ever tracking and metric
/// rows.
pub(crate) struct Recorder {
    rows: Vec<MetricRow>,
    best: Option<(Genome, EpisodeResult)>,
    evaluations: u64,
    budget: u64,
}

impl Recorder {
    pub(crate) fn new(budget: u64) -> Self {
        Recorder {
            rows: Vec::new(),
            best: None,
            evaluations: 0,
            budget,
        }
    }

    /// Whether a batch of `n` more rollouts still fits in the budget.
    pub(crate) fn fits(&self, n: usize) -> bool {
        self.evaluations + n as u64 <= self.budget
    }

    pub(crate) fn count_batch(&mut self, genomes: &[Genome], results: &[EpisodeResult]) {
        self.evaluations += results.len() as u64;
        for (g, r) in genomes.iter().zip(results) {
            let improves = self.best.as_ref().map_or(true, |(_, b)| r.fitness > b.fitness);
            if improves {
                self.best = Some((g.clone(), *r));
            }
        }
    }

    pub(crate) fn best_fitness(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |(_, r)| r.fitness)
    }

    pub(crate) fn emit(&mut self, rep: &Repertoire, alpha: Option<f64>, loop_index: Option<u64>) {
        // Keep the evaluations axis strictly increasing.
        if self.rows.last().is_some_and(|r| r.evaluations == self.evaluations) {
            return;
        }
        self.rows.push(MetricRow {
            evaluations: self.evaluations,
            best_fitness: self.best_fitness(),
            coverage: rep.coverage(),
            alpha,
            loop_index,
        });
    }

    pub(crate) fn finish(
        mut self,
        rep: Repertoire,
        restarts: u64,
    ) -> Result<RunResult, RunError> {
        self.emit(&rep, None, None);
        let (best_genome, best_result) = self.best.ok_or(RunError::Config(
            "run performed no evaluations; budget too small",
        ))?;
        Ok(RunResult {
            rows: self.rows,
            repertoire: rep,
            best_genome,
            best_result,
            evaluations_used: self.evaluations,
            restarts,
        })
    }
}

/// Shared initial-population scheme: genomes uniform in [-1, 1]^dim, the
/// same distribution restarts draw from.
pub(crate) fn random_genome(dim: usize, rng: &mut ChaCha8Rng) -> Genome {
    (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Evaluate and archive `n_init` random genomes.
pub(crate) fn seed_archive(
    n_init: usize,
    evaluator: &dyn Evaluator,
    rep: &mut Repertoire,
    recorder: &mut Recorder,
    rng: &mut ChaCha8Rng,
) -> Result<(), RunError> {
    let dim = evaluator.genome_len();
    let genomes: Vec<Genome> = (0..n_init).map(|_| random_genome(dim, rng)).collect();
    let results = evaluator.evaluate_batch(&genomes);
    recorder.count_batch(&genomes, &results);
    for (g, r) in genomes.iter().zip(&results) {
        let _ = rep.add(g, r.fitness, r.descriptor);
    }
    Ok(())
}

#[cfg(test)]
mod tests;
