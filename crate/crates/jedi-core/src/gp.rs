//! Weighted Gaussian-process regression over behavior space.
//!
//! A cell evaluated n times enters the GP as if its point appeared n times
//! in the training set: the diagonal weight matrix W with W_ii = 1/n_i
//! scales the per-point noise, so the posterior is
//!
//!   mean(x) = k(x, X) (K + noise * W)^-1 y
//!   var(x)  = k(x, x) - k(x, X) (K + noise * W)^-1 k(X, x)
//!
//! which makes the uncertainty landscape keep evolving with evaluation
//! counts even once every cell is filled.
//!
//! [`WeightedGp`] is that posterior verbatim on raw targets. [`GpModel`] is
//! the fitting pipeline used by the search loop: it standardizes targets,
//! maximizes the log marginal likelihood over the kernel parameters by
//! multi-start local search, and de-standardizes predicted means on the way
//! out (variances stay on the standardized scale, which is what acquisition
//! consumes).

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::Descriptor;

/// Smallest admissible noise term.
pub const NOISE_FLOOR: f64 = 1e-8;

/// Isotropic RBF kernel parameters plus the observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub lengthscale: f64,
    pub signal_variance: f64,
    /// Noise variance (the sigma_n^2 multiplying W).
    pub noise: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            lengthscale: 0.3,
            signal_variance: 1.0,
            noise: 1e-3,
        }
    }
}

impl KernelParams {
    pub fn is_valid(&self) -> bool {
        self.lengthscale > 0.0 && self.signal_variance > 0.0 && self.noise >= NOISE_FLOOR
    }
}

/// `signal_variance * exp(-|a-b|^2 / (2 * lengthscale^2))`.
pub fn rbf_kernel(a: Descriptor, b: Descriptor, params: &KernelParams) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let d2 = dx * dx + dy * dy;
    params.signal_variance * libm::exp(-d2 / (2.0 * params.lengthscale * params.lengthscale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpError {
    EmptyTrainingSet,
    /// Factorization failed even after jitter escalation.
    Factorization,
}

impl fmt::Display for GpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpError::EmptyTrainingSet => write!(f, "GP needs at least one training point"),
            GpError::Factorization => {
                write!(f, "kernel matrix not positive definite after jitter escalation")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GpError {}

/// Exact weighted-GP posterior on the targets it was given.
#[derive(Debug, Clone)]
pub struct WeightedGp {
    x: Vec<Descriptor>,
    params: KernelParams,
    /// Lower Cholesky factor of K + noise * W (jitter included if needed).
    l: DMatrix<f64>,
    /// (K + noise * W)^-1 y.
    alpha: DVector<f64>,
    log_marginal: f64,
}

impl WeightedGp {
    /// Factor `K + noise * W` and precompute the prediction vector. Counts
    /// must all be >= 1; each point's noise is divided by its count.
    pub fn new(
        x: &[Descriptor],
        y: &[f64],
        counts: &[u64],
        params: KernelParams,
    ) -> Result<Self, GpError> {
        if x.is_empty() {
            return Err(GpError::EmptyTrainingSet);
        }
        assert_eq!(x.len(), y.len());
        assert_eq!(x.len(), counts.len());
        assert!(counts.iter().all(|&c| c >= 1), "counts must be >= 1");
        assert!(params.is_valid(), "invalid kernel parameters");
        let n = x.len();
        let mut a = DMatrix::from_fn(n, n, |i, j| rbf_kernel(x[i], x[j], &params));
        for i in 0..n {
            a[(i, i)] += params.noise / counts[i] as f64;
        }
        let chol = cholesky_with_jitter(a)?;
        let l = chol.unpack();
        let yv = DVector::from_column_slice(y);
        let alpha = solve_with_factor(&l, &yv);
        let log_det: f64 = (0..n).map(|i| libm::log(l[(i, i)])).sum::<f64>() * 2.0;
        let fit = -0.5 * yv.dot(&alpha);
        let log_marginal =
            fit - 0.5 * log_det - 0.5 * n as f64 * libm::log(2.0 * core::f64::consts::PI);
        Ok(WeightedGp {
            x: x.to_vec(),
            params,
            l,
            alpha,
            log_marginal,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal
    }

    /// Posterior mean and variance at one query point. The variance is
    /// clamped at zero against floating-point cancellation.
    pub fn predict(&self, q: Descriptor) -> (f64, f64) {
        let n = self.x.len();
        let k_star = DVector::from_fn(n, |i, _| rbf_kernel(self.x[i], q, &self.params));
        let mean = k_star.dot(&self.alpha);
        let v = self
            .l
            .solve_lower_triangular(&k_star)
            .expect("factor has positive diagonal");
        let var = rbf_kernel(q, q, &self.params) - v.dot(&v);
        (mean, var.max(0.0))
    }
}

fn cholesky_with_jitter(
    a: DMatrix<f64>,
) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>, GpError> {
    if let Some(c) = nalgebra::Cholesky::new(a.clone()) {
        return Ok(c);
    }
    let n = a.nrows();
    let mut jitter = 1e-10;
    while jitter <= 1e-4 {
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] += jitter;
        }
        if let Some(c) = nalgebra::Cholesky::new(b) {
            return Ok(c);
        }
        jitter *= 10.0;
    }
    Err(GpError::Factorization)
}

/// Solve (L L^T) z = b given the lower factor.
fn solve_with_factor(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let y = l.solve_lower_triangular(b).expect("lower solve");
    l.transpose().solve_upper_triangular(&y).expect("upper solve")
}

/// Search bounds in raw parameter units.
const LENGTHSCALE_BOUNDS: (f64, f64) = (0.01, 2.0);
const SIGNAL_BOUNDS: (f64, f64) = (0.01, 100.0);
const NOISE_BOUNDS: (f64, f64) = (NOISE_FLOOR, 10.0);

/// Fitted surrogate: weighted GP on standardized targets plus the
/// standardization stats needed to report means in raw fitness units.
#[derive(Debug, Clone)]
pub struct GpModel {
    inner: WeightedGp,
    y_mean: f64,
    y_scale: f64,
}

impl GpModel {
    /// Standardize targets, then maximize the log marginal likelihood over
    /// (lengthscale, signal variance, noise) with a seeded 8-start compass
    /// search in log-parameter space. A constant-target training set skips
    /// the search and predicts the constant everywhere.
    pub fn fit(
        x: &[Descriptor],
        y_raw: &[f64],
        counts: &[u64],
        seed: u64,
    ) -> Result<Self, GpError> {
        let std = standardize(y_raw)?;
        if std.degenerate {
            let params = KernelParams {
                noise: NOISE_FLOOR,
                ..KernelParams::default()
            };
            let inner = WeightedGp::new(x, &std.values, counts, params)?;
            return Ok(GpModel {
                inner,
                y_mean: std.mean,
                y_scale: std.scale,
            });
        }
        let params = optimize_marginal_likelihood(x, &std.values, counts, seed)?;
        let inner = WeightedGp::new(x, &std.values, counts, params)?;
        Ok(GpModel {
            inner,
            y_mean: std.mean,
            y_scale: std.scale,
        })
    }

    /// Standardize targets but keep the given kernel parameters.
    pub fn fit_with_params(
        x: &[Descriptor],
        y_raw: &[f64],
        counts: &[u64],
        params: KernelParams,
    ) -> Result<Self, GpError> {
        let std = standardize(y_raw)?;
        let inner = WeightedGp::new(x, &std.values, counts, params)?;
        Ok(GpModel {
            inner,
            y_mean: std.mean,
            y_scale: std.scale,
        })
    }

    pub fn params(&self) -> &KernelParams {
        self.inner.params()
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.inner.log_marginal_likelihood()
    }

    pub fn training_len(&self) -> usize {
        self.inner.x.len()
    }

    /// Mean in raw fitness units, variance on the standardized scale.
    pub fn predict(&self, q: Descriptor) -> (f64, f64) {
        let (m, v) = self.inner.predict(q);
        (self.y_mean + self.y_scale * m, v)
    }

    /// Elementwise [`GpModel::predict`], reusing the cached factorization.
    pub fn predict_batch(&self, qs: &[Descriptor]) -> Vec<(f64, f64)> {
        qs.iter().map(|&q| self.predict(q)).collect()
    }

    /// Mean and variance both on the standardized scale, the units the
    /// acquisition front operates in.
    pub fn predict_standardized(&self, q: Descriptor) -> (f64, f64) {
        self.inner.predict(q)
    }

    pub fn predict_standardized_batch(&self, qs: &[Descriptor]) -> Vec<(f64, f64)> {
        qs.iter().map(|&q| self.inner.predict(q)).collect()
    }
}

struct Standardized {
    values: Vec<f64>,
    mean: f64,
    scale: f64,
    degenerate: bool,
}

fn standardize(y_raw: &[f64]) -> Result<Standardized, GpError> {
    if y_raw.is_empty() {
        return Err(GpError::EmptyTrainingSet);
    }
    let n = y_raw.len() as f64;
    let mean = y_raw.iter().sum::<f64>() / n;
    let var = y_raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let scale = libm::sqrt(var);
    if scale < 1e-12 {
        // Degenerate targets: standardized values are all zero and the
        // prior mean carries the constant.
        return Ok(Standardized {
            values: alloc::vec![0.0; y_raw.len()],
            mean,
            scale: 1.0,
            degenerate: true,
        });
    }
    Ok(Standardized {
        values: y_raw.iter().map(|v| (v - mean) / scale).collect(),
        mean,
        scale,
        degenerate: false,
    })
}

/// Compass search over log-parameters from 8 deterministic starts.
fn optimize_marginal_likelihood(
    x: &[Descriptor],
    y_std: &[f64],
    counts: &[u64],
    seed: u64,
) -> Result<KernelParams, GpError> {
    let bounds = [
        (libm::log(LENGTHSCALE_BOUNDS.0), libm::log(LENGTHSCALE_BOUNDS.1)),
        (libm::log(SIGNAL_BOUNDS.0), libm::log(SIGNAL_BOUNDS.1)),
        (libm::log(NOISE_BOUNDS.0), libm::log(NOISE_BOUNDS.1)),
    ];
    let to_params = |p: &[f64; 3]| KernelParams {
        lengthscale: libm::exp(p[0]),
        signal_variance: libm::exp(p[1]),
        noise: libm::exp(p[2]).max(NOISE_FLOOR),
    };
    let nll = |p: &[f64; 3]| -> f64 {
        match WeightedGp::new(x, y_std, counts, to_params(p)) {
            Ok(gp) => -gp.log_marginal_likelihood(),
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = crate::rng::stream(seed, crate::rng::component::GP_FIT, 0, 0);
    let mut starts: Vec<[f64; 3]> = Vec::with_capacity(8);
    // Heuristic first start: mid lengthscale, unit signal, small noise.
    starts.push([libm::log(0.3), 0.0, libm::log(1e-3)]);
    while starts.len() < 8 {
        let mut s = [0.0; 3];
        for (v, (lo, hi)) in s.iter_mut().zip(&bounds) {
            *v = rng.gen_range(*lo..*hi);
        }
        starts.push(s);
    }

    let mut best: Option<([f64; 3], f64)> = None;
    for start in starts {
        let mut p = start;
        let mut value = nll(&p);
        let mut step = 0.8;
        let mut evals = 1;
        while step > 0.02 && evals < 40 {
            let mut improved = false;
            'coords: for c in 0..3 {
                for dir in [1.0, -1.0] {
                    let mut q = p;
                    q[c] = (q[c] + dir * step).clamp(bounds[c].0, bounds[c].1);
                    if q[c] == p[c] {
                        continue;
                    }
                    let qv = nll(&q);
                    evals += 1;
                    if qv < value {
                        p = q;
                        value = qv;
                        improved = true;
                        break 'coords;
                    }
                    if evals >= 40 {
                        break 'coords;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.as_ref().map_or(true, |(_, bv)| value < *bv) {
            best = Some((p, value));
        }
    }
    let (p, value) = best.expect("at least one start");
    if value.is_infinite() {
        return Err(GpError::Factorization);
    }
    Ok(to_params(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;

    fn fixed() -> KernelParams {
        KernelParams {
            lengthscale: 0.25,
            signal_variance: 2.0,
            noise: 0.05,
        }
    }

    #[test]
    fn kernel_at_zero_distance_is_signal_variance() {
        let p = fixed();
        assert_eq!(rbf_kernel([0.3, 0.7], [0.3, 0.7], &p), 2.0);
    }

    #[test]
    fn kernel_at_sqrt2_lengthscales_is_e_minus_one() {
        let p = KernelParams { lengthscale: 0.2, signal_variance: 1.0, noise: 0.1 };
        let d = 0.2 * core::f64::consts::SQRT_2;
        let k = rbf_kernel([0.0, 0.0], [d, 0.0], &p);
        assert!((k - libm::exp(-1.0)).abs() < 1e-12, "{k}");
    }

    #[test]
    fn kernel_is_symmetric() {
        let p = fixed();
        let mut rng = crate::rng::component_stream(1, 7);
        for _ in 0..100 {
            let a = [rng.gen::<f64>(), rng.gen::<f64>()];
            let b = [rng.gen::<f64>(), rng.gen::<f64>()];
            assert_eq!(rbf_kernel(a, b, &p), rbf_kernel(b, a, &p));
        }
    }

    #[test]
    fn single_point_posterior_recovers_target() {
        let params = KernelParams { noise: NOISE_FLOOR, ..fixed() };
        let model = GpModel::fit_with_params(&[[0.4, 0.4]], &[-120.0], &[1], params).unwrap();
        let (mean, _) = model.predict([0.4, 0.4]);
        assert!((mean + 120.0).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn constant_targets_predict_the_constant_everywhere() {
        let x = [[0.1, 0.1], [0.5, 0.5], [0.9, 0.2]];
        let model = GpModel::fit(&x, &[-42.0, -42.0, -42.0], &[1, 3, 2], 0).unwrap();
        for q in [[0.0, 0.0], [0.7, 0.7], [0.3, 0.9]] {
            let (mean, _) = model.predict(q);
            assert!((mean + 42.0).abs() < 1e-9, "{mean}");
        }
    }

    #[test]
    fn far_field_prediction_returns_to_prior() {
        let gp = WeightedGp::new(&[[0.0, 0.0]], &[3.0], &[1], fixed()).unwrap();
        let (mean, var) = gp.predict([1.0, 1.0]);
        // |q - x| is 5.7 lengthscales: the kernel is ~ e^-16.
        assert!(mean.abs() < 1e-6, "{mean}");
        assert!((var - 2.0).abs() < 1e-6, "{var}");
    }

    #[test]
    fn noiseless_interpolation_at_training_inputs() {
        let mut rng = crate::rng::component_stream(2, 7);
        let params = KernelParams {
            lengthscale: 0.3,
            signal_variance: 1.0,
            noise: NOISE_FLOOR,
        };
        for _ in 0..5 {
            let x: Vec<[f64; 2]> =
                (0..15).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|p| libm::sin(4.0 * p[0]) + p[1] * p[1])
                .collect();
            let counts = vec![1u64; x.len()];
            let model = GpModel::fit_with_params(&x, &y, &counts, params).unwrap();
            for (xi, yi) in x.iter().zip(&y) {
                let (mean, _) = model.predict(*xi);
                assert!((mean - yi).abs() < 1e-6, "{mean} vs {yi}");
            }
        }
    }

    /// The defining reduction: a point with count n behaves exactly like n
    /// duplicated rows in an unweighted GP.
    #[test]
    fn weighted_duplication_equivalence() {
        let mut rng = crate::rng::component_stream(3, 7);
        let params = fixed();
        for _ in 0..10 {
            let n = rng.gen_range(2..12);
            let x: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
            let weighted = WeightedGp::new(&x, &y, &counts, params).unwrap();

            let mut dx = Vec::new();
            let mut dy = Vec::new();
            for i in 0..n {
                for _ in 0..counts[i] {
                    dx.push(x[i]);
                    dy.push(y[i]);
                }
            }
            let ones = vec![1u64; dx.len()];
            let duplicated = WeightedGp::new(&dx, &dy, &ones, params).unwrap();

            for _ in 0..20 {
                let q = [rng.gen::<f64>(), rng.gen::<f64>()];
                let (m1, v1) = weighted.predict(q);
                let (m2, v2) = duplicated.predict(q);
                assert!((m1 - m2).abs() < 1e-8, "mean {m1} vs {m2}");
                assert!((v1 - v2).abs() < 1e-8, "var {v1} vs {v2}");
            }
        }
    }

    #[test]
    fn more_counts_never_raise_variance_at_the_point() {
        let mut rng = crate::rng::component_stream(4, 7);
        let params = fixed();
        for _ in 0..20 {
            let x: Vec<[f64; 2]> =
                (0..8).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut counts: Vec<u64> = (0..8).map(|_| rng.gen_range(1..4)).collect();
            let i = rng.gen_range(0..8);
            let before = WeightedGp::new(&x, &y, &counts, params).unwrap().predict(x[i]).1;
            counts[i] += rng.gen_range(1..4);
            let after = WeightedGp::new(&x, &y, &counts, params).unwrap().predict(x[i]).1;
            assert!(after <= before + 1e-12, "{after} > {before}");
        }
    }

    #[test]
    fn variance_never_exceeds_signal_variance() {
        let mut rng = crate::rng::component_stream(5, 7);
        let params = fixed();
        let x: Vec<[f64; 2]> = (0..10).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let y: Vec<f64> = (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let counts: Vec<u64> = (0..10).map(|_| rng.gen_range(1..5)).collect();
        let gp = WeightedGp::new(&x, &y, &counts, params).unwrap();
        for _ in 0..200 {
            let q = [rng.gen::<f64>(), rng.gen::<f64>()];
            let (_, v) = gp.predict(q);
            assert!(v <= params.signal_variance + 1e-9 && v >= 0.0);
        }
    }

    #[test]
    fn predictions_invariant_under_row_permutation() {
        let x = [[0.1, 0.2], [0.8, 0.3], [0.5, 0.9], [0.2, 0.7]];
        let y = [1.0, -2.0, 0.5, 3.0];
        let counts = [2u64, 1, 4, 1];
        let a = WeightedGp::new(&x, &y, &counts, fixed()).unwrap();
        let xp = [x[2], x[0], x[3], x[1]];
        let yp = [y[2], y[0], y[3], y[1]];
        let cp = [counts[2], counts[0], counts[3], counts[1]];
        let b = WeightedGp::new(&xp, &yp, &cp, fixed()).unwrap();
        for q in [[0.0, 0.0], [0.4, 0.6], [0.9, 0.9]] {
            let (ma, va) = a.predict(q);
            let (mb, vb) = b.predict(q);
            assert!((ma - mb).abs() < 1e-10 && (va - vb).abs() < 1e-10);
        }
    }

    #[test]
    fn fitted_likelihood_beats_random_parameter_draws() {
        let mut rng = crate::rng::component_stream(6, 7);
        let x: Vec<[f64; 2]> = (0..20).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let y: Vec<f64> = x.iter().map(|p| libm::cos(3.0 * p[0]) * p[1]).collect();
        let counts = vec![1u64; 20];
        let model = GpModel::fit(&x, &y, &counts, 99).unwrap();
        let p = model.params();
        assert!(p.lengthscale >= 0.01 && p.lengthscale <= 2.0);
        assert!(p.signal_variance >= 0.01 && p.signal_variance <= 100.0);
        let fitted_lml = model.log_marginal_likelihood();
        // Standardize the way fit does before comparing likelihoods.
        let std = standardize(&y).unwrap();
        for _ in 0..20 {
            let draw = KernelParams {
                lengthscale: rng.gen_range(0.01..2.0),
                signal_variance: rng.gen_range(0.01..100.0),
                noise: rng.gen_range(NOISE_FLOOR..10.0),
            };
            let lml = WeightedGp::new(&x, &std.values, &counts, draw)
                .unwrap()
                .log_marginal_likelihood();
            assert!(fitted_lml >= lml, "fit {fitted_lml} beaten by draw {lml}");
        }
    }

    #[test]
    fn batch_prediction_matches_singles() {
        let mut rng = crate::rng::component_stream(7, 7);
        let x: Vec<[f64; 2]> = (0..12).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let counts: Vec<u64> = (0..12).map(|_| rng.gen_range(1..3)).collect();
        let model = GpModel::fit_with_params(&x, &y, &counts, fixed()).unwrap();
        let qs: Vec<[f64; 2]> = (0..100).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let batch = model.predict_batch(&qs);
        assert_eq!(batch.len(), qs.len());
        for (q, b) in qs.iter().zip(&batch) {
            let single = model.predict(*q);
            assert_eq!(*b, single);
        }
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert_eq!(GpModel::fit(&[], &[], &[], 0).unwrap_err(), GpError::EmptyTrainingSet);
    }
}
