//! Synthetic benchmark functions with a 2D behavior descriptor read off the
//! first two genome coordinates. The deceptive trap is the desk-scale
//! stand-in for hard-exploration control tasks: its fitness gradient leads
//! to a wide local basin while the global optimum hides in a behavior
//! region no fitness-following search will visit.

use super::{EpisodeResult, Evaluator};
use crate::Descriptor;

/// Descriptor affine map: genome coordinate range mapped onto [0, 1].
const DESCRIPTOR_SPAN: f64 = 6.0;

/// Trap geometry in descriptor space.
const LOCAL_CENTER: [f64; 2] = [0.2, 0.2];
const GLOBAL_CENTER: [f64; 2] = [0.9, 0.9];
const LOCAL_PEAK: f64 = 50.0;
const GLOBAL_PEAK: f64 = 100.0;
const GLOBAL_WIDTH: f64 = 0.06;
/// Local basin is 10x wider than the global one.
const LOCAL_WIDTH: f64 = 10.0 * GLOBAL_WIDTH;
/// Quadratic penalty on the coordinates not visible in the descriptor.
const TAIL_PENALTY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Sphere,
    Rastrigin,
    DeceptiveTrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticTask {
    pub kind: SyntheticKind,
    pub dim: usize,
}

impl SyntheticTask {
    pub fn new(kind: SyntheticKind, dim: usize) -> Self {
        assert!(dim >= 2, "synthetic tasks need at least 2 coordinates");
        SyntheticTask { kind, dim }
    }

    /// First two coordinates affinely mapped from [-2, 2] onto [0, 1],
    /// clamped so the descriptor always stays in the unit square.
    pub fn descriptor_of(&self, genome: &[f64]) -> Descriptor {
        [
            (0.5 + genome[0] / DESCRIPTOR_SPAN).clamp(0.0, 1.0),
            (0.5 + genome[1] / DESCRIPTOR_SPAN).clamp(0.0, 1.0),
        ]
    }

    fn fitness_of(&self, genome: &[f64]) -> f64 {
        match self.kind {
            SyntheticKind::Sphere => -genome.iter().map(|x| x * x).sum::<f64>(),
            SyntheticKind::Rastrigin => {
                let d = genome.len() as f64;
                let s: f64 = genome
                    .iter()
                    .map(|x| x * x - 10.0 * libm::cos(2.0 * core::f64::consts::PI * x))
                    .sum();
                -(10.0 * d + s)
            }
            SyntheticKind::DeceptiveTrap => {
                let u = self.descriptor_of(genome);
                let basin = |center: [f64; 2], peak: f64, width: f64| {
                    let dx = u[0] - center[0];
                    let dy = u[1] - center[1];
                    peak * libm::exp(-(dx * dx + dy * dy) / (2.0 * width * width))
                };
                let local = basin(LOCAL_CENTER, LOCAL_PEAK, LOCAL_WIDTH);
                let global = basin(GLOBAL_CENTER, GLOBAL_PEAK, GLOBAL_WIDTH);
                let tail: f64 = genome[2..].iter().map(|x| x * x).sum();
                local.max(global) - TAIL_PENALTY * tail
            }
        }
    }

    /// Genome coordinates that put the descriptor exactly at `d` (useful for
    /// sizing budgets and tests).
    pub fn genome_at_descriptor(&self, d: Descriptor) -> crate::Genome {
        let mut g = alloc::vec![0.0; self.dim];
        g[0] = (d[0] - 0.5) * DESCRIPTOR_SPAN;
        g[1] = (d[1] - 0.5) * DESCRIPTOR_SPAN;
        g
    }

    /// Fitness value separating the two trap basins: anything above it is
    /// only attainable inside the global basin.
    pub fn trap_global_threshold() -> f64 {
        75.0
    }
}

impl Evaluator for SyntheticTask {
    fn genome_len(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, genome: &[f64]) -> EpisodeResult {
        assert_eq!(genome.len(), self.dim, "genome length mismatch");
        EpisodeResult {
            fitness: self.fitness_of(genome),
            descriptor: self.descriptor_of(genome),
            steps_used: 1,
            reached_target: false,
        }
    }
}
