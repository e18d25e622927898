//! Rank-based evolution strategies behind a uniform ask/tell interface.
//!
//! Two engines are provided: a separable CMA-ES (diagonal covariance, the
//! maze workhorse) and a limited-memory MA-ES for large genomes. Both are
//! invariant to strictly increasing score transforms: only the ranking of a
//! population matters, which is what lets the weighted target-fitness score
//! replace raw fitness without touching the optimizer.

mod lm_ma;
mod sep_cma;

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;

use crate::Genome;

/// Which update rule drives the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    SepCma,
    LmMa,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsConfig {
    pub engine: Engine,
    pub dim: usize,
    /// Population size per generation.
    pub population: usize,
    pub sigma_init: f64,
    /// Fraction of the population recombined into the new center.
    pub elite_ratio: f64,
    /// Direction vectors kept by the limited-memory engine; defaults to
    /// 4 + floor(3 ln dim).
    pub memory: Option<usize>,
}

impl EsConfig {
    pub fn new(engine: Engine, dim: usize) -> Self {
        EsConfig {
            engine,
            dim,
            population: 16,
            sigma_init: 0.05,
            elite_ratio: 0.5,
            memory: None,
        }
    }

    /// Number of recombined parents, at least 1 and at most the population.
    pub fn mu(&self) -> usize {
        let mu = libm::ceil(self.elite_ratio * self.population as f64) as usize;
        mu.clamp(1, self.population)
    }

    pub fn memory_size(&self) -> usize {
        self.memory
            .unwrap_or_else(|| 4 + libm::floor(3.0 * libm::log(self.dim as f64)) as usize)
    }

    pub fn validate(&self) -> Result<(), EsError> {
        if self.dim == 0 || self.population == 0 {
            return Err(EsError::InvalidConfig("dim and population must be positive"));
        }
        if !(self.sigma_init > 0.0) {
            return Err(EsError::InvalidConfig("sigma_init must be positive"));
        }
        if !(self.elite_ratio > 0.0 && self.elite_ratio <= 1.0) {
            return Err(EsError::InvalidConfig("elite_ratio must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsError {
    InvalidConfig(&'static str),
    DimensionMismatch { expected: usize, got: usize },
    TellWithoutAsk,
    ScoreCountMismatch { expected: usize, got: usize },
}

impl fmt::Display for EsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EsError::InvalidConfig(msg) => write!(f, "invalid ES config: {msg}"),
            EsError::DimensionMismatch { expected, got } => {
                write!(f, "center length {got} does not match dim {expected}")
            }
            EsError::TellWithoutAsk => write!(f, "tell called without a pending ask"),
            EsError::ScoreCountMismatch { expected, got } => {
                write!(f, "got {got} scores for a population of {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EsError {}

/// Log-rank recombination weights for the best `mu` of `mu` ranks,
/// normalized to sum 1.
fn log_rank_weights(mu: usize) -> Vec<f64> {
    let base = libm::log(mu as f64 + 0.5);
    let mut w: Vec<f64> = (1..=mu).map(|i| base - libm::log(i as f64)).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Variance-effective selection mass of a weight vector.
fn mu_eff(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Sample indices ordered best-first: higher score wins, ties break toward
/// the lower sample index, non-finite scores sink to the bottom.
fn ranked_indices(scores: &[f64]) -> Vec<usize> {
    let key = |s: f64| if s.is_finite() { s } else { f64::NEG_INFINITY };
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        key(scores[b])
            .partial_cmp(&key(scores[a]))
            .expect("keys are never NaN")
            .then(a.cmp(&b))
    });
    idx
}

struct Selection {
    /// Best-first sample indices, truncated to the recombination size and
    /// stripped of non-finite scores.
    indices: Vec<usize>,
    /// Matching weights, renormalized if non-finite scores shrank the pool.
    weights: Vec<f64>,
}

fn select(scores: &[f64], mu: usize, weights: &[f64]) -> Option<Selection> {
    let ranked = ranked_indices(scores);
    let finite: Vec<usize> = ranked
        .into_iter()
        .take(mu)
        .filter(|&i| scores[i].is_finite())
        .collect();
    if finite.is_empty() {
        return None;
    }
    let mut w = weights[..finite.len()].to_vec();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    Some(Selection { indices: finite, weights: w })
}

#[derive(Debug)]
enum EngineState {
    SepCma(sep_cma::SepCma),
    LmMa(lm_ma::LmMa),
}

#[derive(Debug)]
struct PendingBatch {
    genomes: Vec<Genome>,
    /// Standard-normal draws behind each genome.
    z: Vec<Vec<f64>>,
    /// Transformed directions (x = center + sigma * d).
    d: Vec<Vec<f64>>,
}

/// Distribution state of one ES instance.
#[derive(Debug)]
pub struct EsState {
    config: EsConfig,
    center: Vec<f64>,
    sigma: f64,
    generation: u64,
    weights: Vec<f64>,
    engine: EngineState,
    rng: ChaCha8Rng,
    pending: Option<PendingBatch>,
}

impl EsState {
    /// Fresh state centered on `center` with all adaptation variables at
    /// their defaults.
    pub fn new(config: EsConfig, center: &[f64], rng: ChaCha8Rng) -> Result<Self, EsError> {
        config.validate()?;
        if center.len() != config.dim {
            return Err(EsError::DimensionMismatch {
                expected: config.dim,
                got: center.len(),
            });
        }
        let weights = log_rank_weights(config.mu());
        let mu_eff = mu_eff(&weights);
        let engine = match config.engine {
            Engine::SepCma => EngineState::SepCma(sep_cma::SepCma::new(&config, mu_eff)),
            Engine::LmMa => EngineState::LmMa(lm_ma::LmMa::new(&config, mu_eff)),
        };
        Ok(EsState {
            center: center.to_vec(),
            sigma: config.sigma_init,
            generation: 0,
            weights,
            engine,
            rng,
            config,
            pending: None,
        })
    }

    /// Convenience constructor with a derived random stream.
    pub fn new_seeded(config: EsConfig, center: &[f64], seed: u64) -> Result<Self, EsError> {
        let rng = crate::rng::stream(seed, crate::rng::component::EMITTER, 0, 0);
        Self::new(config, center, rng)
    }

    pub fn config(&self) -> &EsConfig {
        &self.config
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Diagonal of the search covariance (unit for the limited-memory
    /// engine, which never materializes it).
    pub fn covariance_diagonal(&self) -> Vec<f64> {
        match &self.engine {
            EngineState::SepCma(s) => s.diag.clone(),
            EngineState::LmMa(_) => alloc::vec![1.0; self.config.dim],
        }
    }

    /// Sample a fresh population. Only advances the RNG; a repeated ask
    /// discards the previous pending batch.
    pub fn ask(&mut self) -> Vec<Genome> {
        let lambda = self.config.population;
        let dim = self.config.dim;
        let mut z = Vec::with_capacity(lambda);
        let mut d = Vec::with_capacity(lambda);
        let mut genomes = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let zk: Vec<f64> = (0..dim)
                .map(|_| rand::Rng::sample(&mut self.rng, rand_distr::StandardNormal))
                .collect();
            let dk = match &self.engine {
                EngineState::SepCma(s) => s.direction(&zk),
                EngineState::LmMa(s) => s.direction(&zk, self.generation),
            };
            let genome: Genome = self
                .center
                .iter()
                .zip(&dk)
                .map(|(c, di)| c + self.sigma * di)
                .collect();
            z.push(zk);
            d.push(dk);
            genomes.push(genome);
        }
        self.pending = Some(PendingBatch {
            genomes: genomes.clone(),
            z,
            d,
        });
        genomes
    }

    /// Rank the pending population by score (higher is better) and update
    /// center, step size and adaptation state. Non-finite scores are demoted
    /// to the worst ranks and never enter recombination.
    pub fn tell(&mut self, scores: &[f64]) -> Result<(), EsError> {
        let expected = self
            .pending
            .as_ref()
            .map(|b| b.genomes.len())
            .ok_or(EsError::TellWithoutAsk)?;
        if scores.len() != expected {
            // Leave the pending batch alone so the caller can retry.
            return Err(EsError::ScoreCountMismatch {
                expected,
                got: scores.len(),
            });
        }
        let batch = self.pending.take().expect("checked above");
        let selection = match select(scores, self.config.mu(), &self.weights) {
            Some(s) => s,
            None => {
                // Every score was non-finite: leave the distribution alone.
                self.generation += 1;
                return Ok(());
            }
        };
        let dim = self.config.dim;
        let mut z_w = alloc::vec![0.0; dim];
        let mut d_w = alloc::vec![0.0; dim];
        for (&idx, &w) in selection.indices.iter().zip(&selection.weights) {
            for i in 0..dim {
                z_w[i] += w * batch.z[idx][i];
                d_w[i] += w * batch.d[idx][i];
            }
        }
        for i in 0..dim {
            self.center[i] += self.sigma * d_w[i];
        }
        let sigma = self.sigma;
        let generation = self.generation;
        match &mut self.engine {
            EngineState::SepCma(s) => {
                self.sigma = s.update(sigma, generation, &z_w, &batch, &selection);
            }
            EngineState::LmMa(s) => {
                self.sigma = s.update(sigma, &z_w);
            }
        }
        self.sigma = self.sigma.max(1e-300);
        self.generation += 1;
        Ok(())
    }
}

/// Convergence detector for the restart wrapper: remembers the raw-fitness
/// range of the last `window` generations and fires once every recorded
/// range is negligible relative to the best fitness seen.
#[derive(Debug, Clone)]
pub struct RestartMonitor {
    window: usize,
    ranges: VecDeque<f64>,
    best: f64,
}

impl Default for RestartMonitor {
    fn default() -> Self {
        Self::new(20)
    }
}

impl RestartMonitor {
    pub fn new(window: usize) -> Self {
        RestartMonitor {
            window,
            ranges: VecDeque::with_capacity(window + 1),
            best: f64::NEG_INFINITY,
        }
    }

    /// Record one generation's raw fitness values.
    pub fn record(&mut self, fitnesses: &[f64]) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &f in fitnesses {
            if f.is_finite() {
                lo = lo.min(f);
                hi = hi.max(f);
                self.best = self.best.max(f);
            }
        }
        let range = if hi >= lo { hi - lo } else { f64::INFINITY };
        self.ranges.push_back(range);
        if self.ranges.len() > self.window {
            self.ranges.pop_front();
        }
    }

    /// True iff the window is full and every range is below
    /// `1e-6 * (1 + |best fitness|)`.
    pub fn should_restart(&self) -> bool {
        if self.ranges.len() < self.window {
            return false;
        }
        let threshold = 1e-6 * (1.0 + libm::fabs(self.best));
        self.ranges.iter().all(|&r| r < threshold)
    }

    /// Forget everything, for use right after a restart.
    pub fn reset(&mut self) {
        self.ranges.clear();
        self.best = f64::NEG_INFINITY;
    }
}

#[cfg(test)]
mod tests;
