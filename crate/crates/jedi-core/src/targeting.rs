//! Behavior-target selection: evaluate the surrogate at every archive
//! centroid and sample targets uniformly from the Pareto front of
//! (predicted mean, predicted variance), both maximized. The front trades
//! exploitation (high mean) against exploration (high variance) with no
//! tunable weighting.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::archive::Repertoire;
use crate::gp::GpModel;
use crate::Descriptor;

/// Surrogate prediction at one centroid, on the standardized scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionPoint {
    pub centroid_index: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Chosen behavior targets plus the centroid indices they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBatch {
    pub targets: Vec<Descriptor>,
    pub source_indices: Vec<usize>,
}

/// Indices of all non-dominated points under (max mean, max variance).
/// `p` dominates `q` iff p.mean >= q.mean and p.variance >= q.variance with
/// at least one strict; exact duplicates of a front point all stay in.
pub fn pareto_front(points: &[AcquisitionPoint]) -> Vec<usize> {
    assert!(!points.is_empty(), "pareto_front on empty set");
    let mut order: Vec<usize> = (0..points.len()).collect();
    // Sort by mean descending, variance descending within equal means.
    order.sort_by(|&a, &b| {
        points[b]
            .mean
            .partial_cmp(&points[a].mean)
            .unwrap()
            .then(points[b].variance.partial_cmp(&points[a].variance).unwrap())
    });
    let mut front = Vec::new();
    // Highest variance among points with strictly greater mean.
    let mut var_ceiling = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        // Group of equal means.
        let mut j = i;
        while j < order.len() && points[order[j]].mean == points[order[i]].mean {
            j += 1;
        }
        let group_max_var = points[order[i]].variance; // sorted within group
        if group_max_var > var_ceiling {
            for &idx in &order[i..j] {
                if points[idx].variance == group_max_var {
                    front.push(idx);
                }
            }
        }
        var_ceiling = var_ceiling.max(group_max_var);
        i = j;
    }
    front.sort_unstable();
    front
}

/// Predict over all centroids, take the Pareto front, and sample `n_es`
/// targets uniformly: without replacement while the front is large enough,
/// with replacement otherwise.
pub fn select_targets(
    model: &GpModel,
    rep: &Repertoire,
    n_es: usize,
    rng: &mut ChaCha8Rng,
) -> TargetBatch {
    assert!(n_es >= 1);
    let centroids = rep.centroids().points();
    let preds = model.predict_standardized_batch(centroids);
    let points: Vec<AcquisitionPoint> = preds
        .iter()
        .enumerate()
        .map(|(i, &(mean, variance))| AcquisitionPoint {
            centroid_index: i,
            mean,
            variance,
        })
        .collect();
    let front = pareto_front(&points);
    let chosen: Vec<usize> = if front.len() >= n_es {
        let mut picks = front.clone();
        let (sampled, _) = picks.partial_shuffle(rng, n_es);
        sampled.to_vec()
    } else {
        (0..n_es).map(|_| front[rng.gen_range(0..front.len())]).collect()
    };
    TargetBatch {
        targets: chosen.iter().map(|&i| centroids[i]).collect(),
        source_indices: chosen,
    }
}

/// Ablation arm: ignore the surrogate and sample centroids uniformly with
/// replacement.
pub fn select_targets_uniform(
    rep: &Repertoire,
    n_es: usize,
    rng: &mut ChaCha8Rng,
) -> TargetBatch {
    assert!(n_es >= 1);
    let centroids = rep.centroids().points();
    let chosen: Vec<usize> = (0..n_es).map(|_| rng.gen_range(0..centroids.len())).collect();
    TargetBatch {
        targets: chosen.iter().map(|&i| centroids[i]).collect(),
        source_indices: chosen,
    }
}
