//! Worker-pool plumbing. The `JEDI_WORKERS` environment variable sets the
//! thread count and must never change results: seeds are independent and
//! batch evaluation is an order-preserving parallel map over pure rollouts.

use jedi_core::env::{EpisodeResult, Evaluator};
use jedi_core::Genome;
use rayon::prelude::*;

use crate::CliError;

pub const WORKERS_ENV: &str = "JEDI_WORKERS";

/// Worker count from the environment, defaulting to the machine's
/// parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

pub fn build_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot build worker pool: {e}")))
}

/// Evaluator adapter that fans batches out over the current rayon pool.
pub struct ParallelEvaluator<'a> {
    inner: &'a dyn Evaluator,
}

impl<'a> ParallelEvaluator<'a> {
    pub fn new(inner: &'a dyn Evaluator) -> Self {
        ParallelEvaluator { inner }
    }
}

impl Evaluator for ParallelEvaluator<'_> {
    fn genome_len(&self) -> usize {
        self.inner.genome_len()
    }

    fn evaluate(&self, genome: &[f64]) -> EpisodeResult {
        self.inner.evaluate(genome)
    }

    fn evaluate_batch(&self, genomes: &[Genome]) -> Vec<EpisodeResult> {
        if genomes.len() < 8 {
            return genomes.iter().map(|g| self.inner.evaluate(g)).collect();
        }
        genomes.par_iter().map(|g| self.inner.evaluate(g)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use jedi_core::env::{SyntheticKind, SyntheticTask};

    #[test]
    fn parallel_batches_match_sequential_order() {
        let task = SyntheticTask::new(SyntheticKind::Rastrigin, 4);
        let par = ParallelEvaluator::new(&task);
        let genomes: Vec<Genome> = (0..64)
            .map(|i| vec![i as f64 * 0.01, -0.3, 0.2, 0.5])
            .collect();
        let sequential = task.evaluate_batch(&genomes);
        let pool = build_pool(4).unwrap();
        let parallel = pool.install(|| par.evaluate_batch(&genomes));
        assert_eq!(sequential, parallel);
    }
}
