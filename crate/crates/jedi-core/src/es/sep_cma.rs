//! Separable CMA-ES: full CMA-ES update rules restricted to a diagonal
//! covariance, with the covariance learning rates scaled up by (n + 2) / 3
//! as published for the separable variant. Linear time and memory in the
//! dimension.

use alloc::vec;
use alloc::vec::Vec;

use super::{EsConfig, PendingBatch, Selection};

#[derive(Debug)]
pub(super) struct SepCma {
    /// Diagonal covariance entries, all > 0.
    pub(super) diag: Vec<f64>,
    p_sigma: Vec<f64>,
    p_c: Vec<f64>,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_one: f64,
    c_mu: f64,
    mu_eff: f64,
    chi_n: f64,
    dim: usize,
}

impl SepCma {
    pub(super) fn new(config: &EsConfig, mu_eff: f64) -> Self {
        let n = config.dim as f64;
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma =
            1.0 + 2.0 * (libm::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let sep_scale = (n + 2.0) / 3.0;
        let c_one = (sep_scale * 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff)).min(1.0);
        let c_mu_base =
            sep_scale * 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff);
        let c_mu = c_mu_base.min(1.0 - c_one);
        let chi_n = libm::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        SepCma {
            diag: vec![1.0; config.dim],
            p_sigma: vec![0.0; config.dim],
            p_c: vec![0.0; config.dim],
            c_sigma,
            d_sigma,
            c_c,
            c_one,
            c_mu,
            mu_eff,
            chi_n,
            dim: config.dim,
        }
    }

    /// Scale a standard-normal draw by the covariance square root.
    pub(super) fn direction(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.diag)
            .map(|(zi, ci)| zi * libm::sqrt(*ci))
            .collect()
    }

    /// One generation's update; returns the new sigma.
    pub(super) fn update(
        &mut self,
        sigma: f64,
        generation: u64,
        z_w: &[f64],
        batch: &PendingBatch,
        selection: &Selection,
    ) -> f64 {
        let n = self.dim;
        let cs = self.c_sigma;
        let path_scale = libm::sqrt(cs * (2.0 - cs) * self.mu_eff);
        for i in 0..n {
            self.p_sigma[i] = (1.0 - cs) * self.p_sigma[i] + path_scale * z_w[i];
        }
        let p_norm = libm::sqrt(self.p_sigma.iter().map(|v| v * v).sum::<f64>());
        let decay = 1.0 - libm::pow(1.0 - cs, 2.0 * (generation + 1) as f64);
        let h_sig = if decay > 0.0
            && p_norm / libm::sqrt(decay) < (1.4 + 2.0 / (n as f64 + 1.0)) * self.chi_n
        {
            1.0
        } else {
            0.0
        };

        let cc = self.c_c;
        let pc_scale = libm::sqrt(cc * (2.0 - cc) * self.mu_eff);
        // (center' - center) / sigma in sampling coordinates is the weighted
        // mean of the scaled directions.
        for i in 0..n {
            let y_w = z_w[i] * libm::sqrt(self.diag[i]);
            self.p_c[i] = (1.0 - cc) * self.p_c[i] + h_sig * pc_scale * y_w;
        }

        let keep = 1.0 - self.c_one - self.c_mu;
        for i in 0..n {
            let mut rank_mu = 0.0;
            for (&idx, &w) in selection.indices.iter().zip(&selection.weights) {
                let y = batch.d[idx][i];
                rank_mu += w * y * y;
            }
            let rank_one =
                self.p_c[i] * self.p_c[i] + (1.0 - h_sig) * cc * (2.0 - cc) * self.diag[i];
            let updated = keep * self.diag[i] + self.c_one * rank_one + self.c_mu * rank_mu;
            self.diag[i] = updated.max(f64::MIN_POSITIVE);
        }

        sigma * libm::exp((cs / self.d_sigma) * (p_norm / self.chi_n - 1.0))
    }
}
