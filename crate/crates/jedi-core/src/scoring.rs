//! Per-population score normalization and the weighted target-fitness score
//! that steers an ES toward a behavior target while still rewarding fitness.
//!
//! All normalization is strictly per population: min/max are taken over the
//! current batch of evaluations, never over run history.

use alloc::vec::Vec;

use crate::Descriptor;

/// Schedule for the target-score weight over the outer loops of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    Constant(f64),
    /// Linear interpolation from `start` (first loop) to `end` (last loop).
    Linear { start: f64, end: f64 },
}

impl AlphaSchedule {
    /// Weight at `loop_index` of `total_loops`. A single-loop run uses the
    /// start of a linear schedule.
    pub fn alpha_at(&self, loop_index: usize, total_loops: usize) -> f64 {
        assert!(total_loops >= 1, "total_loops must be >= 1");
        assert!(loop_index < total_loops, "loop_index out of range");
        match *self {
            AlphaSchedule::Constant(a) => a,
            AlphaSchedule::Linear { start, end } => {
                if total_loops == 1 {
                    start
                } else {
                    let t = loop_index as f64 / (total_loops - 1) as f64;
                    // Guard the endpoints against one-ulp drift.
                    (start + (end - start) * t).clamp(start.min(end), start.max(end))
                }
            }
        }
    }

    /// True iff every weight the schedule can produce lies in [0, 1].
    pub fn is_valid(&self) -> bool {
        match *self {
            AlphaSchedule::Constant(a) => (0.0..=1.0).contains(&a),
            AlphaSchedule::Linear { start, end } => {
                (0.0..=1.0).contains(&start) && (0.0..=1.0).contains(&end)
            }
        }
    }
}

/// One ES generation's evaluations plus the behavior target they were scored
/// against.
#[derive(Debug, Clone)]
pub struct PopulationEval {
    pub fitnesses: Vec<f64>,
    pub descriptors: Vec<Descriptor>,
    pub target: Descriptor,
}

/// Min-max normalize fitness values into [0, 1] over this population.
/// A degenerate population (all equal) scores 0.5 everywhere, which is
/// neutral under a rank-based ES update.
pub fn fitness_scores(fitnesses: &[f64]) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &f in fitnesses {
        lo = lo.min(f);
        hi = hi.max(f);
    }
    if !(hi > lo) {
        return alloc::vec![0.5; fitnesses.len()];
    }
    fitnesses.iter().map(|&f| (f - lo) / (hi - lo)).collect()
}

/// Score closeness to `target` in behavior space: 1 for the population's
/// nearest descriptor, 0 for the farthest, 0.5 everywhere when degenerate.
pub fn target_scores(descriptors: &[Descriptor], target: Descriptor) -> Vec<f64> {
    let dists: Vec<f64> = descriptors
        .iter()
        .map(|d| libm::hypot(d[0] - target[0], d[1] - target[1]))
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &d in &dists {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if !(hi > lo) {
        return alloc::vec![0.5; descriptors.len()];
    }
    dists.iter().map(|&d| 1.0 - (d - lo) / (hi - lo)).collect()
}

/// Convex combination `alpha * target_score + (1 - alpha) * fitness_score`.
/// `alpha = 0` is pure fitness optimization, `alpha = 1` pure target seeking.
pub fn wtfs_scores(pop: &PopulationEval, alpha: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&alpha), "alpha out of [0,1]");
    assert_eq!(pop.fitnesses.len(), pop.descriptors.len());
    let fit = fitness_scores(&pop.fitnesses);
    let tgt = target_scores(&pop.descriptors, pop.target);
    fit.iter()
        .zip(&tgt)
        .map(|(&f, &t)| alpha * t + (1.0 - alpha) * f)
        .collect()
}
