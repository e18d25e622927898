#![cfg_attr(not(feature = "std"), no_std)]

//! Gradient-free policy search that spends its evaluation budget where
//! behavior space looks promising.
//!
//! The toolkit couples rank-based evolution strategies with a CVT behavior
//! archive, a weighted Gaussian-process surrogate over behavior space, and
//! Pareto-front target selection. Everything here is deterministic given a
//! seed and free of IO; the companion CLI crate owns files, configs and
//! parallelism.

extern crate alloc;

pub mod archive;
pub mod env;
pub mod es;
pub mod gp;
pub mod methods;
pub mod rng;
pub mod scoring;
pub mod stats;
pub mod targeting;

/// Flat real-valued parameter vector: a policy network's weights or a
/// synthetic-benchmark point.
pub type Genome = alloc::vec::Vec<f64>;

/// Point in the 2D normalized behavior space, each coordinate in [0, 1].
pub type Descriptor = [f64; 2];

/// Euclidean distance between two behavior descriptors.
pub fn descriptor_distance(a: Descriptor, b: Descriptor) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}
