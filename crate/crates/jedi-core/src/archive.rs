//! CVT-discretized behavior archive. Each cell keeps the best genome whose
//! descriptor fell into it, its fitness, and how many evaluations landed
//! there — the count that drives the weighted GP's uncertainty.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::{descriptor_distance, Descriptor, Genome};

/// Centroidal Voronoi tessellation of [0, 1]^2, reproducible from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids {
    points: Vec<Descriptor>,
    seed: u64,
}

impl Centroids {
    /// Seeded k-means++ initialization followed by Lloyd iterations on
    /// 50*k uniform samples; stops after 100 rounds or when the relative
    /// centroid shift drops below 1e-6.
    pub fn build(k: usize, seed: u64) -> Self {
        assert!(k >= 1, "need at least one centroid");
        let mut rng = crate::rng::component_stream(seed, 0xC017);
        let n_samples = 50 * k;
        let samples: Vec<Descriptor> = (0..n_samples)
            .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();

        // k-means++ seeding.
        let mut points: Vec<Descriptor> = Vec::with_capacity(k);
        points.push(samples[rng.gen_range(0..n_samples)]);
        let mut d2 = vec![f64::INFINITY; n_samples];
        while points.len() < k {
            let last = *points.last().unwrap();
            let mut total = 0.0;
            for (s, d) in samples.iter().zip(d2.iter_mut()) {
                let dist = descriptor_distance(*s, last);
                *d = d.min(dist * dist);
                total += *d;
            }
            let next = if total > 0.0 {
                let mut pick = rng.gen::<f64>() * total;
                let mut chosen = n_samples - 1;
                for (i, &d) in d2.iter().enumerate() {
                    pick -= d;
                    if pick <= 0.0 {
                        chosen = i;
                        break;
                    }
                }
                chosen
            } else {
                rng.gen_range(0..n_samples)
            };
            points.push(samples[next]);
        }

        // Lloyd refinement.
        let mut assignment = vec![0usize; n_samples];
        for _ in 0..100 {
            for (s, slot) in samples.iter().zip(assignment.iter_mut()) {
                let mut best = (f64::INFINITY, 0usize);
                for (ci, c) in points.iter().enumerate() {
                    let dx = s[0] - c[0];
                    let dy = s[1] - c[1];
                    let d = dx * dx + dy * dy;
                    if d < best.0 {
                        best = (d, ci);
                    }
                }
                *slot = best.1;
            }
            let mut sums = vec![[0.0f64; 2]; k];
            let mut counts = vec![0usize; k];
            for (s, &ci) in samples.iter().zip(&assignment) {
                sums[ci][0] += s[0];
                sums[ci][1] += s[1];
                counts[ci] += 1;
            }
            let mut shift = 0.0f64;
            for (ci, point) in points.iter_mut().enumerate() {
                if counts[ci] == 0 {
                    continue; // empty cluster keeps its centroid
                }
                let new = [
                    sums[ci][0] / counts[ci] as f64,
                    sums[ci][1] / counts[ci] as f64,
                ];
                shift = shift.max(descriptor_distance(*point, new));
                *point = new;
            }
            if shift < 1e-6 {
                break;
            }
        }
        Centroids { points, seed }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn points(&self) -> &[Descriptor] {
        &self.points
    }

    /// Index of the Euclidean-nearest centroid, ties to the lowest index.
    pub fn nearest(&self, descriptor: Descriptor) -> usize {
        let mut best = (f64::INFINITY, 0usize);
        for (ci, c) in self.points.iter().enumerate() {
            let dx = descriptor[0] - c[0];
            let dy = descriptor[1] - c[1];
            let d = dx * dx + dy * dy;
            if d < best.0 {
                best = (d, ci);
            }
        }
        best.1
    }
}

/// Best solution seen in a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub genome: Genome,
    pub fitness: f64,
    /// The elite's own descriptor (not the cell centroid).
    pub descriptor: Descriptor,
}

/// One behavior cell: optional elite plus the cell's evaluation count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cell {
    pub elite: Option<Elite>,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveError {
    NonFiniteFitness,
    EmptyRepertoire,
}

impl fmt::Display for ArchiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchiveError::NonFiniteFitness => write!(f, "non-finite fitness rejected"),
            ArchiveError::EmptyRepertoire => write!(f, "repertoire has no filled cell"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ArchiveError {}

/// Inputs for fitting the behavior-fitness surrogate: one row per filled
/// cell, positioned at the cell centroid.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub x: Vec<Descriptor>,
    pub y: Vec<f64>,
    pub counts: Vec<u64>,
    /// Centroid indices behind each row.
    pub cell_indices: Vec<usize>,
}

/// The MAP-Elites style repertoire.
#[derive(Debug, Clone)]
pub struct Repertoire {
    centroids: Centroids,
    cells: Vec<Cell>,
    total_evaluations: u64,
}

impl Repertoire {
    pub fn new(centroids: Centroids) -> Self {
        let cells = vec![Cell::default(); centroids.len()];
        Repertoire {
            centroids,
            cells,
            total_evaluations: 0,
        }
    }

    pub fn centroids(&self) -> &Centroids {
        &self.centroids
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn total_evaluations(&self) -> u64 {
        self.total_evaluations
    }

    /// Fraction of cells holding at least one evaluation.
    pub fn coverage(&self) -> f64 {
        let filled = self.cells.iter().filter(|c| c.count > 0).count();
        filled as f64 / self.cells.len() as f64
    }

    pub fn nearest_cell(&self, descriptor: Descriptor) -> usize {
        self.centroids.nearest(descriptor)
    }

    /// Record an evaluation: its cell count always increments, the elite is
    /// replaced only on strict fitness improvement (ties keep the
    /// incumbent). Returns whether the elite changed.
    pub fn add(
        &mut self,
        genome: &[f64],
        fitness: f64,
        descriptor: Descriptor,
    ) -> Result<bool, ArchiveError> {
        if !fitness.is_finite() {
            return Err(ArchiveError::NonFiniteFitness);
        }
        let ci = self.nearest_cell(descriptor);
        let cell = &mut self.cells[ci];
        cell.count += 1;
        self.total_evaluations += 1;
        let improves = cell.elite.as_ref().map_or(true, |e| fitness > e.fitness);
        if improves {
            cell.elite = Some(Elite {
                genome: genome.to_vec(),
                fitness,
                descriptor,
            });
        }
        Ok(improves)
    }

    /// The filled cell whose stored elite descriptor is closest to `target`,
    /// ties to the lowest cell index.
    pub fn nearest_elite(&self, target: Descriptor) -> Result<&Elite, ArchiveError> {
        let mut best: Option<(f64, &Elite)> = None;
        for cell in &self.cells {
            if let Some(e) = &cell.elite {
                let d = descriptor_distance(e.descriptor, target);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, e));
                }
            }
        }
        best.map(|(_, e)| e).ok_or(ArchiveError::EmptyRepertoire)
    }

    /// Best elite overall, ties to the lowest cell index.
    pub fn best_elite(&self) -> Option<&Elite> {
        let mut best: Option<&Elite> = None;
        for cell in &self.cells {
            if let Some(e) = &cell.elite {
                if best.map_or(true, |b| e.fitness > b.fitness) {
                    best = Some(e);
                }
            }
        }
        best
    }

    /// Filled cells only; X rows are centroid coordinates so the GP design
    /// matrix does not churn when elites are replaced.
    pub fn gp_training_set(&self) -> Result<TrainingSet, ArchiveError> {
        let mut ts = TrainingSet {
            x: Vec::new(),
            y: Vec::new(),
            counts: Vec::new(),
            cell_indices: Vec::new(),
        };
        for (ci, cell) in self.cells.iter().enumerate() {
            if let Some(e) = &cell.elite {
                ts.x.push(self.centroids.points()[ci]);
                ts.y.push(e.fitness);
                ts.counts.push(cell.count);
                ts.cell_indices.push(ci);
            }
        }
        if ts.x.is_empty() {
            return Err(ArchiveError::EmptyRepertoire);
        }
        Ok(ts)
    }
}
