//! Result aggregation: medians, the two-sided Mann-Whitney U test used to
//! compare per-seed final fitness distributions, and convergence tables on a
//! shared evaluation grid.

use alloc::vec;
use alloc::vec::Vec;

/// How the p-value of a U test was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    /// Full enumeration of rank assignments (tie-free, n1*n2 <= 400).
    Exact,
    /// Normal approximation with tie-corrected variance and continuity
    /// correction.
    NormalApproximation,
}

#[derive(Debug, Clone, Copy)]
pub struct UTestResult {
    /// U statistic of the first sample.
    pub u_statistic: f64,
    /// Two-sided p-value in [0, 1].
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Standard median; an even-length sample averages the two middle order
/// statistics. Panics on an empty slice.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in median"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Midranks of the concatenation of `a` and `b` (1-based, ties averaged).
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, bool) {
    let mut tagged: Vec<(f64, usize)> = a
        .iter()
        .chain(b.iter())
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    tagged.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("non-finite sample value"));
    let n = tagged.len();
    let mut ranks = vec![0.0; n];
    let mut has_ties = false;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && tagged[j].0 == tagged[i].0 {
            j += 1;
        }
        if j - i > 1 {
            has_ties = true;
        }
        let rank = (i + j + 1) as f64 / 2.0; // average of 1-based positions i+1..=j
        for k in i..j {
            ranks[tagged[k].1] = rank;
        }
        i = j;
    }
    (ranks, has_ties)
}

/// Number of ways to pick `n1` of the ranks 1..=n1+n2 for each possible rank
/// sum, indexed by rank sum. Subset-sum dynamic program.
fn rank_sum_counts(n1: usize, n2: usize) -> Vec<u64> {
    let n = n1 + n2;
    let max_sum: usize = (n - n1 + 1..=n).sum();
    // counts[j][s]: ways to choose j ranks from those seen so far with sum s.
    let mut counts = vec![vec![0u64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1;
    for rank in 1..=n {
        for j in (1..=n1.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                counts[j][s] += counts[j - 1][s - rank];
            }
        }
    }
    counts.pop().unwrap()
}

/// Two-sided Mann-Whitney U test. The U statistic is computed from rank sums
/// with midrank tie handling. The p-value is exact (enumeration over rank
/// assignments) for tie-free samples with n1*n2 <= 400, otherwise a normal
/// approximation with tie-corrected variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> UTestResult {
    assert!(!a.is_empty() && !b.is_empty(), "mann_whitney_u on empty sample");
    let n1 = a.len();
    let n2 = b.len();
    let (ranks, has_ties) = midranks(a, b);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let n_prod = (n1 * n2) as f64;

    if !has_ties && n1 * n2 <= 400 {
        // Tie-free U is an integer; its null distribution comes from counting
        // rank subsets.
        let counts = rank_sum_counts(n1, n2);
        let total: u64 = counts.iter().sum();
        let min_r1 = (n1 * (n1 + 1)) / 2;
        let u_obs = libm::round(u1) as usize;
        let le: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, _)| s.checked_sub(min_r1).is_some_and(|u| u <= u_obs))
            .map(|(_, &c)| c)
            .sum();
        let ge: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, _)| s.checked_sub(min_r1).is_some_and(|u| u >= u_obs))
            .map(|(_, &c)| c)
            .sum();
        let tail = (le.min(ge) as f64) / (total as f64);
        return UTestResult {
            u_statistic: u1,
            p_value: (2.0 * tail).min(1.0),
            method: PValueMethod::Exact,
        };
    }

    // Tie correction: sum of (t^3 - t) over tie groups of the pooled sample.
    let mut pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let n = (n1 + n2) as f64;
    let variance = n_prod / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p_value = if variance <= 0.0 {
        1.0
    } else {
        let z = (libm::fabs(u1 - n_prod / 2.0) - 0.5).max(0.0) / libm::sqrt(variance);
        libm::erfc(z / core::f64::consts::SQRT_2).min(1.0)
    };
    UTestResult {
        u_statistic: u1,
        p_value,
        method: PValueMethod::NormalApproximation,
    }
}

/// Aggregated best-fitness statistics at one evaluation-grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub median: f64,
    pub std_dev: f64,
    /// Runs that had recorded at least one row by this grid point.
    pub runs: usize,
}

/// Median and standard deviation of best-ever fitness across runs at each
/// grid point. Each run is a step function sampled at the last row whose
/// evaluation count does not exceed the grid point; a run without any such
/// row is skipped, and a grid point no run has reached yet is `None`.
pub fn convergence_table(
    runs: &[&[(u64, f64)]],
    eval_grid: &[u64],
) -> Vec<(u64, Option<GridCell>)> {
    assert!(!runs.is_empty(), "convergence_table needs at least one run");
    eval_grid
        .iter()
        .map(|&g| {
            let mut values = Vec::new();
            for run in runs {
                if let Some(&(_, best)) = run.iter().take_while(|(e, _)| *e <= g).last() {
                    values.push(best);
                }
            }
            let cell = if values.is_empty() {
                None
            } else {
                let m = median(&values);
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / values.len() as f64;
                Some(GridCell {
                    median: m,
                    std_dev: libm::sqrt(var),
                    runs: values.len(),
                })
            };
            (g, cell)
        })
        .collect()
}
