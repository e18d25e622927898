//! Limited-memory MA-ES: the covariance transform is represented by m
//! direction vectors applied recursively to each standard-normal draw, so
//! memory stays O(m * n) with no matrix anywhere. Learning rates follow the
//! published schedule (1 / (1.5^i n) for the transform, lambda / (4^i n)
//! for the vectors, 2 lambda / n for step-size control), clamped into (0, 1)
//! so small dimensions with large populations stay stable.

use alloc::vec;
use alloc::vec::Vec;

use super::EsConfig;

#[derive(Debug)]
pub(super) struct LmMa {
    vectors: Vec<Vec<f64>>,
    p_sigma: Vec<f64>,
    c_d: Vec<f64>,
    c_c: Vec<f64>,
    c_sigma: f64,
    mu_eff: f64,
    dim: usize,
}

impl LmMa {
    pub(super) fn new(config: &EsConfig, mu_eff: f64) -> Self {
        let n = config.dim as f64;
        let m = config.memory_size().max(1);
        let c_sigma = (2.0 * config.population as f64 / n).min(0.5);
        let c_d: Vec<f64> = (0..m).map(|i| 1.0 / (libm::pow(1.5, i as f64) * n)).collect();
        let c_c: Vec<f64> = (0..m)
            .map(|i| (config.population as f64 / (libm::pow(4.0, i as f64) * n)).min(0.9))
            .collect();
        LmMa {
            vectors: vec![vec![0.0; config.dim]; m],
            p_sigma: vec![0.0; config.dim],
            c_d,
            c_c,
            c_sigma,
            mu_eff,
            dim: config.dim,
        }
    }

    /// Transform a standard-normal draw through the stored directions. Only
    /// the first `generation` vectors have been trained, so later ones are
    /// skipped early in a run.
    pub(super) fn direction(&self, z: &[f64], generation: u64) -> Vec<f64> {
        let mut d = z.to_vec();
        let active = (generation as usize).min(self.vectors.len());
        for j in 0..active {
            let proj: f64 = self.vectors[j].iter().zip(&d).map(|(m, di)| m * di).sum();
            let cd = self.c_d[j];
            for (di, mj) in d.iter_mut().zip(&self.vectors[j]) {
                *di = (1.0 - cd) * *di + cd * proj * mj;
            }
        }
        d
    }

    /// One generation's update; returns the new sigma.
    pub(super) fn update(&mut self, sigma: f64, z_w: &[f64]) -> f64 {
        let cs = self.c_sigma;
        let path_scale = libm::sqrt(cs * (2.0 - cs) * self.mu_eff);
        for (p, zi) in self.p_sigma.iter_mut().zip(z_w) {
            *p = (1.0 - cs) * *p + path_scale * zi;
        }
        for (vec_j, &cc) in self.vectors.iter_mut().zip(&self.c_c) {
            let vec_scale = libm::sqrt(cc * (2.0 - cc) * self.mu_eff);
            for (m, zi) in vec_j.iter_mut().zip(z_w) {
                *m = (1.0 - cc) * *m + vec_scale * zi;
            }
        }
        let p_norm2: f64 = self.p_sigma.iter().map(|v| v * v).sum();
        // d_sigma = 2 in the published schedule.
        sigma * libm::exp((cs / 2.0) * (p_norm2 / self.dim as f64 - 1.0))
    }
}
