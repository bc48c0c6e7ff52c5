//! Cross-validated choice of the hard-thresholding levels.
//!
//! Each of `N1` random splits draws a size-`n1` subset of the time indices
//! (`n1 = floor(n (1 - 1/ln n))`), kept in time order, and leaves the other
//! `n2 = n - n1` indices as the second part. A candidate threshold is
//! scored by the mean squared Frobenius distance between the thresholded
//! first-part estimate and the raw second-part estimate; the smallest
//! minimizer wins.
//!
//! Split `s` is drawn from a ChaCha8 stream keyed by `(seed, s)`, so the
//! selection only depends on the inputs, not on evaluation order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::estimators::{all_pair_autocov_centered, hard_threshold, lagged_cross_product, row_autocov};
use crate::matrix::Matrix;
use crate::series::MatrixSeries;

/// Default number of random splits.
pub const DEFAULT_SPLITS: usize = 20;
/// Largest Kronecker-product estimate (in entries) the pair selector builds.
pub const MAX_KRONECKER_ENTRIES: u64 = 100_000_000;
/// Number of candidates in the default quantile grid.
pub const QUANTILE_GRID_LEN: usize = 32;

/// Candidate thresholds.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Grid {
    /// Zero, 30 empirical quantiles (levels 0.10 to 0.99) of the absolute
    /// entries of the full-sample estimate at the lag, and its maximum.
    #[default]
    Quantiles,
    /// Explicit non-empty, non-negative, ascending candidates.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvPlan {
    pub splits: usize,
    pub seed: u64,
    pub grid: Grid,
}

impl CvPlan {
    pub fn new(splits: usize, seed: u64) -> Self {
        CvPlan { splits, seed, grid: Grid::Quantiles }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = Grid::Values(grid);
        self
    }

    /// `(n1, n2)` for a series of length `n`.
    pub fn split_sizes(n: usize) -> Result<(usize, usize)> {
        if n < 8 {
            return Err(invalid(format!("cross-validation needs n >= 8, got {n}")));
        }
        let n1 = libm::floor(n as f64 * (1.0 - 1.0 / libm::log(n as f64))) as usize;
        Ok((n1, n - n1))
    }

    /// The random splits used for a series of length `n`.
    pub fn draw_splits(&self, n: usize) -> Result<Vec<Split>> {
        if self.splits == 0 {
            return Err(invalid("cross-validation needs at least one split"));
        }
        let (n1, _) = Self::split_sizes(n)?;
        Ok((0..self.splits)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(s as u64);
                let mut first = rand::seq::index::sample(&mut rng, n, n1).into_vec();
                first.sort_unstable();
                let mut in_first = vec![false; n];
                for &t in &first {
                    in_first[t] = true;
                }
                let second = (0..n).filter(|&t| !in_first[t]).collect();
                Split { first, second }
            })
            .collect())
    }
}

/// One random partition of the time indices (0-based, ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSelection {
    pub threshold: f64,
    pub grid: Vec<f64>,
    /// Objective value at each grid point.
    pub objective: Vec<f64>,
}

impl CvSelection {
    pub fn min_objective(&self) -> f64 {
        self.objective.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Lag-`k` row autocovariance over a subset of time indices, centered at
/// the subset mean; terms whose partner index `t + k` falls past the end
/// contribute zero.
pub fn subset_autocov(series: &MatrixSeries, times: &[usize], k: usize) -> Matrix {
    let (n, p, q) = (series.n(), series.p(), series.q());
    let w = p * q;
    let mut mean = vec![0.0; w];
    for &t in times {
        for (m, x) in mean.iter_mut().zip(series.observation(t)) {
            *m += x;
        }
    }
    let inv = 1.0 / times.len() as f64;
    mean.iter_mut().for_each(|m| *m *= inv);

    let mut out = Matrix::zeros(q, q);
    for &t in times {
        if t + k >= n {
            continue;
        }
        let late = series.observation(t + k);
        let early = series.observation(t);
        for r in 0..p {
            for a in 0..q {
                let la = late[r * q + a] - mean[r * q + a];
                for b in 0..q {
                    out[(a, b)] += la * (early[r * q + b] - mean[r * q + b]);
                }
            }
        }
    }
    out.scale(1.0 / (times.len() * p) as f64)
}

/// `sum_{t in times, t+h < n} vec(c_{t+h}) vec(c_t)^T` over centered rows.
fn subset_outer_sum(centered: &[f64], width: usize, n: usize, times: &[usize], h: usize) -> Matrix {
    let mut out = Matrix::zeros(width, width);
    let acc = out.as_mut_slice();
    for &t in times {
        if t + h >= n {
            continue;
        }
        let late = &centered[(t + h) * width..(t + h + 1) * width];
        let early = &centered[t * width..(t + 1) * width];
        for (a, &la) in late.iter().enumerate() {
            let row = &mut acc[a * width..(a + 1) * width];
            for (o, &e) in row.iter_mut().zip(early) {
                *o += la * e;
            }
        }
    }
    out
}

/// Quantile (linear interpolation) of ascending data.
fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let pos = level * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// The default grid built from a full-sample estimate.
pub fn quantile_grid(estimate: &Matrix) -> Vec<f64> {
    let mut abs: Vec<f64> = estimate.as_slice().iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let levels = QUANTILE_GRID_LEN - 2;
    let mut grid = Vec::with_capacity(QUANTILE_GRID_LEN);
    grid.push(0.0);
    for i in 0..levels {
        let level = 0.10 + (0.99 - 0.10) * i as f64 / (levels - 1) as f64;
        grid.push(quantile_sorted(&abs, level));
    }
    grid.push(abs[abs.len() - 1]);
    grid
}

fn resolve_grid(grid: &Grid, estimate: impl FnOnce() -> Result<Matrix>) -> Result<Vec<f64>> {
    match grid {
        Grid::Quantiles => Ok(quantile_grid(&estimate()?)),
        Grid::Values(v) => {
            if v.is_empty() {
                return Err(invalid("threshold grid is empty"));
            }
            if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(invalid("threshold grid must be finite and non-negative"));
            }
            if v.windows(2).any(|w| w[0] > w[1]) {
                return Err(invalid("threshold grid must be ascending"));
            }
            Ok(v.clone())
        }
    }
}

/// Grid search over precomputed `(first, second)` estimate pairs.
fn select(grid: Vec<f64>, pairs: &[(Matrix, Matrix)], keep_diagonal: bool) -> Result<CvSelection> {
    let mut objective = Vec::with_capacity(grid.len());
    for &u in &grid {
        let mut total = 0.0;
        for (first, second) in pairs {
            total += hard_threshold(first, u, keep_diagonal)?.sub(second).frobenius_sq();
        }
        objective.push(total / pairs.len() as f64);
    }
    let mut best = 0;
    for (i, &r) in objective.iter().enumerate() {
        if r < objective[best] {
            best = i;
        }
    }
    Ok(CvSelection { threshold: grid[best], grid, objective })
}

/// Threshold `u_k` for the lag-`k` row autocovariance. The lag-0 estimate
/// keeps its diagonal under thresholding, as it does when standardizing.
pub fn cv_threshold_autocov(series: &MatrixSeries, k: usize, plan: &CvPlan) -> Result<CvSelection> {
    let n = series.n();
    if k + 2 > n {
        return Err(invalid(format!("lag {k} out of range for n = {n}")));
    }
    let splits = plan.draw_splits(n)?;
    let grid = resolve_grid(&plan.grid, || Ok(row_autocov(series, k)?.entries))?;
    let pairs: Vec<(Matrix, Matrix)> =
        splits.iter().map(|s| (subset_autocov(series, &s.first, k), subset_autocov(series, &s.second, k))).collect();
    select(grid, &pairs, k == 0)
}

/// Threshold `v_h` for the row-pair covariances at lag `h`, chosen on the
/// `pq x pq` Kronecker-product estimates. The series is centered at its
/// full-sample mean first.
pub fn cv_threshold_pair(series: &MatrixSeries, h: usize, plan: &CvPlan) -> Result<CvSelection> {
    let n = series.n();
    if h + 2 > n {
        return Err(invalid(format!("lag {h} out of range for n = {n}")));
    }
    let width = series.p() * series.q();
    let entries = (width as u64).saturating_mul(width as u64);
    if entries > MAX_KRONECKER_ENTRIES {
        return Err(Error::ResourceLimit { entries });
    }
    let splits = plan.draw_splits(n)?;
    let centered = series.centered();
    let grid = resolve_grid(&plan.grid, || Ok(all_pair_autocov_centered(&centered, n, width, h)))?;

    let total = lagged_cross_product(&centered, width, h);
    let pairs: Vec<(Matrix, Matrix)> = splits
        .iter()
        .map(|s| {
            let second_sum = subset_outer_sum(&centered, width, n, &s.second, h);
            let first = total.sub(&second_sum).scale(1.0 / s.first.len() as f64);
            let second = second_sum.scale(1.0 / s.second.len() as f64);
            (first, second)
        })
        .collect();
    select(grid, &pairs, h == 0)
}

/// Kronecker-product estimate over a subset, exposed for checking the pair
/// selector: `(1/|S|) sum_{t in S} vec(Y_{t+h} - Ybar) vec(Y_t - Ybar)^T`.
pub fn subset_kronecker(series: &MatrixSeries, times: &[usize], h: usize) -> Matrix {
    let width = series.p() * series.q();
    let centered = series.centered();
    subset_outer_sum(&centered, width, series.n(), times, h).scale(1.0 / times.len() as f64)
}
