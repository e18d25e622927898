//! Feedforward policy network decoded from a flat genome: rectifier hidden
//! layers, tanh outputs mapping to wheel speeds in (-1, 1).

use alloc::vec;
use alloc::vec::Vec;

use super::{EnvError, Observation};

/// Network architecture. The genome packs, per layer, the weight matrix in
/// row-major order followed by the bias vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicySpec {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub output_dim: usize,
}

impl Default for PolicySpec {
    /// The maze controller: 5 inputs (3 lidar + 2 bumpers), one hidden layer
    /// of 8, 2 wheel-speed outputs. Genome length 66.
    fn default() -> Self {
        PolicySpec {
            input_dim: 5,
            hidden_layers: vec![8],
            output_dim: 2,
        }
    }
}

impl PolicySpec {
    /// Total number of parameters: sum over layers of in*out + out.
    pub fn genome_len(&self) -> usize {
        let mut total = 0;
        let mut prev = self.input_dim;
        for &h in self.hidden_layers.iter().chain(core::iter::once(&self.output_dim)) {
            total += prev * h + h;
            prev = h;
        }
        total
    }
}

struct Layer {
    weights: Vec<f64>, // out x in, row-major
    biases: Vec<f64>,
    in_dim: usize,
    out_dim: usize,
}

/// A genome decoded into layers, with reusable activation buffers so the
/// per-step forward pass does not allocate.
pub struct PolicyNet {
    layers: Vec<Layer>,
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
}

impl PolicyNet {
    pub fn from_genome(genome: &[f64], spec: &PolicySpec) -> Result<Self, EnvError> {
        if spec.output_dim != 2 {
            return Err(EnvError::UnsupportedOutputDim(spec.output_dim));
        }
        let expected = spec.genome_len();
        if genome.len() != expected {
            return Err(EnvError::GenomeLength {
                expected,
                got: genome.len(),
            });
        }
        let mut layers = Vec::with_capacity(spec.hidden_layers.len() + 1);
        let mut prev = spec.input_dim;
        let mut offset = 0;
        let mut max_width = spec.input_dim;
        for &h in spec.hidden_layers.iter().chain(core::iter::once(&spec.output_dim)) {
            let w_len = prev * h;
            layers.push(Layer {
                weights: genome[offset..offset + w_len].to_vec(),
                biases: genome[offset + w_len..offset + w_len + h].to_vec(),
                in_dim: prev,
                out_dim: h,
            });
            offset += w_len + h;
            max_width = max_width.max(h);
            prev = h;
        }
        Ok(PolicyNet {
            layers,
            buf_a: vec![0.0; max_width],
            buf_b: vec![0.0; max_width],
        })
    }

    /// One forward pass. Hidden layers use relu, the final layer tanh.
    pub fn forward(&mut self, input: &[f64]) -> [f64; 2] {
        debug_assert_eq!(input.len(), self.layers[0].in_dim);
        self.buf_a[..input.len()].copy_from_slice(input);
        let n_layers = self.layers.len();
        for (li, layer) in self.layers.iter().enumerate() {
            let last = li == n_layers - 1;
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut acc = layer.biases[o];
                for (w, x) in row.iter().zip(&self.buf_a[..layer.in_dim]) {
                    acc += w * x;
                }
                self.buf_b[o] = if last { libm::tanh(acc) } else { acc.max(0.0) };
            }
            core::mem::swap(&mut self.buf_a, &mut self.buf_b);
        }
        [self.buf_a[0], self.buf_a[1]]
    }
}

/// Decode the genome and run a single forward pass on one observation.
pub fn policy_forward(
    genome: &[f64],
    obs: &Observation,
    spec: &PolicySpec,
) -> Result<[f64; 2], EnvError> {
    let mut net = PolicyNet::from_genome(genome, spec)?;
    Ok(net.forward(&obs.as_input()))
}
