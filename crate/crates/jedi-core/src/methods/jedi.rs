//! The surrogate-steered main loop. Each outer loop refits the GP on the
//! repertoire, picks behavior targets from its Pareto front, and runs one
//! warm-started ES per target under the weighted target-fitness score; all
//! evaluations are buffered and flushed into the repertoire when the loop's
//! emitters are done, so the n_es inner runs are mutually independent.

use alloc::vec::Vec;

use crate::archive::{Centroids, Repertoire};
use crate::env::Evaluator;
use crate::es::{EsConfig, EsState};
use crate::gp::GpModel;
use crate::scoring::{wtfs_scores, AlphaSchedule, PopulationEval};
use crate::targeting::{select_targets, select_targets_uniform, TargetBatch};
use crate::{rng, Genome};

use super::{seed_archive, Recorder, RunError, RunResult};

/// How behavior targets are chosen each loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Pareto front of the count-weighted GP (the full method).
    WeightedGp,
    /// Ablation: GP with every cell counted once.
    StandardGp,
    /// Ablation: uniform random centroids, no surrogate.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct JediConfig {
    /// Random genomes evaluated into the archive before the first loop.
    pub n_init: usize,
    /// Parallel ES emitters per loop.
    pub n_es: usize,
    /// Outer loops; None derives the count from the budget.
    pub loops: Option<usize>,
    /// ES generations per emitter per loop.
    pub es_generations: usize,
    pub es: EsConfig,
    pub alpha: AlphaSchedule,
    pub selection: SelectionMode,
    pub eval_budget: u64,
}

impl JediConfig {
    fn validate(&self, genome_len: usize) -> Result<(), RunError> {
        if self.n_init == 0 {
            return Err(RunError::Config("n_init must be positive"));
        }
        if self.n_es == 0 || self.es_generations == 0 {
            return Err(RunError::Config("n_es and es_generations must be positive"));
        }
        if self.eval_budget < self.n_init as u64 {
            return Err(RunError::Config("eval_budget smaller than n_init"));
        }
        if !self.alpha.is_valid() {
            return Err(RunError::Config("alpha out of [0,1]"));
        }
        if self.es.dim != genome_len {
            return Err(RunError::Config("es.dim does not match the environment"));
        }
        self.es.validate()?;
        Ok(())
    }

    /// Loops either as configured or sized so the planned evaluations fill
    /// the budget.
    fn total_loops(&self) -> usize {
        self.loops.unwrap_or_else(|| {
            let per_loop = (self.n_es * self.es_generations * self.es.population) as u64;
            let remaining = self.eval_budget.saturating_sub(self.n_init as u64);
            (remaining.div_ceil(per_loop.max(1)) as usize).max(1)
        })
    }
}

pub fn jedi_run(
    config: &JediConfig,
    evaluator: &dyn Evaluator,
    centroids: Centroids,
    seed: u64,
) -> Result<RunResult, RunError> {
    config.validate(evaluator.genome_len())?;
    let mut rep = Repertoire::new(centroids);
    let mut recorder = Recorder::new(config.eval_budget);

    let mut init_rng = rng::stream(seed, rng::component::INIT, 0, 0);
    seed_archive(config.n_init, evaluator, &mut rep, &mut recorder, &mut init_rng)?;
    recorder.emit(&rep, None, None);

    let total_loops = config.total_loops();
    let lambda = config.es.population;
    for loop_index in 0..total_loops {
        if !recorder.fits(lambda) {
            break;
        }
        let alpha = config.alpha.alpha_at(loop_index, total_loops);
        let targets = pick_targets(config, &rep, seed, loop_index)?;

        // Emitters only read the repertoire; their evaluations are buffered
        // and flushed together afterwards.
        let mut buffer: Vec<(Genome, crate::env::EpisodeResult)> = Vec::new();
        for (slot, target) in targets.targets.iter().enumerate() {
            let elite_genome = rep.nearest_elite(*target)?.genome.clone();
            let es_rng = rng::stream(
                seed,
                rng::component::EMITTER,
                loop_index as u64,
                slot as u64,
            );
            let mut es = EsState::new(config.es.clone(), &elite_genome, es_rng)?;
            for _ in 0..config.es_generations {
                if !recorder.fits(lambda) {
                    break;
                }
                let pop = es.ask();
                let results = evaluator.evaluate_batch(&pop);
                recorder.count_batch(&pop, &results);
                let eval = PopulationEval {
                    fitnesses: results.iter().map(|r| r.fitness).collect(),
                    descriptors: results.iter().map(|r| r.descriptor).collect(),
                    target: *target,
                };
                es.tell(&wtfs_scores(&eval, alpha))?;
                buffer.extend(pop.into_iter().zip(&results).map(|(g, r)| (g, *r)));
            }
        }
        for (genome, result) in &buffer {
            let _ = rep.add(genome, result.fitness, result.descriptor);
        }
        recorder.emit(&rep, Some(alpha), Some(loop_index as u64));
    }
    recorder.finish(rep, 0)
}

fn pick_targets(
    config: &JediConfig,
    rep: &Repertoire,
    seed: u64,
    loop_index: usize,
) -> Result<TargetBatch, RunError> {
    let mut rng = rng::stream(seed, rng::component::TARGETS, loop_index as u64, 0);
    match config.selection {
        SelectionMode::Uniform => Ok(select_targets_uniform(rep, config.n_es, &mut rng)),
        mode => {
            let ts = rep.gp_training_set()?;
            let counts: Vec<u64> = match mode {
                SelectionMode::StandardGp => alloc::vec![1; ts.counts.len()],
                _ => ts.counts.clone(),
            };
            let fit_seed = seed ^ (loop_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let model = GpModel::fit(&ts.x, &ts.y, &counts, fit_seed)?;
            Ok(select_targets(&model, rep, config.n_es, &mut rng))
        }
    }
}
