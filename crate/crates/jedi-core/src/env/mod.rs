//! Deterministic evaluation environments: a 2D lidar-robot maze simulator
//! with a deceptive time-to-target fitness, the fixed-architecture policy
//! network controlling it, and synthetic benchmark functions.
//!
//! Episodes are pure functions of (genome, environment); there is no noise
//! anywhere, so batches can be evaluated in parallel with no effect on
//! results.

mod maze;
mod policy;
mod presets;
mod synthetic;

pub use maze::{
    lidar_cast, maze_step, run_episode, run_episode_traced, MazeEnv, MazeError, MazeSpec,
    RobotState, Segment, StepOutcome, TraceStep, AXLE, DT, LIDAR_MAX_RANGE, LIDAR_OFFSETS, V_MAX,
};
#[cfg(test)]
pub(crate) use maze::point_segment_distance;
pub use policy::{policy_forward, PolicyNet, PolicySpec};
pub use presets::{chambers, detour, open_arena, quadruple, spiral};
pub use synthetic::{SyntheticKind, SyntheticTask};

use crate::{Descriptor, Genome};
use alloc::vec::Vec;
use core::fmt;

/// What the robot senses: three normalized lidar ranges and two binary
/// bumper contact flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Range readings in [0, 1], one per beam, front-left to front-right.
    pub lidar: [f64; 3],
    /// Left/right contact flags, 0.0 or 1.0.
    pub bumpers: [f64; 2],
}

impl Observation {
    /// Flatten to the policy input layout: lidar beams then bumpers.
    pub fn as_input(&self) -> [f64; 5] {
        [
            self.lidar[0],
            self.lidar[1],
            self.lidar[2],
            self.bumpers[0],
            self.bumpers[1],
        ]
    }
}

/// Outcome of one rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeResult {
    pub fitness: f64,
    /// Behavior descriptor in [0, 1]^2.
    pub descriptor: Descriptor,
    pub steps_used: u32,
    pub reached_target: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvError {
    GenomeLength { expected: usize, got: usize },
    UnsupportedOutputDim(usize),
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::GenomeLength { expected, got } => {
                write!(f, "genome length mismatch: expected {expected}, got {got}")
            }
            EnvError::UnsupportedOutputDim(d) => {
                write!(f, "policy output dimension must be 2, got {d}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EnvError {}

/// A deterministic rollout function. Implementations must be pure: the same
/// genome always yields the same result, so batch evaluation may be
/// parallelized and reordered freely.
pub trait Evaluator: Sync {
    /// Expected genome length.
    fn genome_len(&self) -> usize;

    /// Run one episode. Panics if the genome length does not match; callers
    /// are expected to validate dimensions at configuration time.
    fn evaluate(&self, genome: &[f64]) -> EpisodeResult;

    /// Evaluate a batch in order. The default is sequential; parallel
    /// implementations must preserve output order.
    fn evaluate_batch(&self, genomes: &[Genome]) -> Vec<EpisodeResult> {
        genomes.iter().map(|g| self.evaluate(g)).collect()
    }
}
