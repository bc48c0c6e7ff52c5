//! Sample and hard-thresholded (auto)covariance estimators, and the W
//! statistics whose eigenvectors drive the segmentation.
//!
//! Row indices, column indices and lags are 0-based. All sample means are
//! taken over the full series even when a lagged sum stops at `n - k`.
//!
//! Threshold lists (`u_per_lag`, `v_per_lag`) are indexed by lag: entry `k`
//! is the threshold applied to the lag-`k` estimate.

use alloc::format;

use crate::error::{invalid, Result};
use crate::linalg::SymMatrix;
use crate::matrix::Matrix;
use crate::series::MatrixSeries;

/// Row covariance of the series at a lag, `q x q`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCov {
    pub lag: usize,
    pub entries: Matrix,
}

/// Lagged covariance between rows `i` and `j`, `q x q`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPairCov {
    pub i: usize,
    pub j: usize,
    pub lag: usize,
    pub entries: Matrix,
}

fn check_lag(series: &MatrixSeries, k: usize) -> Result<()> {
    if k >= series.n() {
        return Err(invalid(format!("lag {k} out of range for n = {}", series.n())));
    }
    Ok(())
}

/// `sum_s x[s + offset]^T x[s]` over the rows of a flat `rows x width`
/// buffer; entry `(a, b)` pairs column `a` of the later row with column `b`
/// of the earlier one.
pub(crate) fn lagged_cross_product(x: &[f64], width: usize, offset: usize) -> Matrix {
    let rows = x.len() / width;
    let mut out = Matrix::zeros(width, width);
    if offset >= rows {
        return out;
    }
    let acc = out.as_mut_slice();
    for s in 0..rows - offset {
        let late = &x[(s + offset) * width..(s + offset + 1) * width];
        let early = &x[s * width..(s + 1) * width];
        for (a, &la) in late.iter().enumerate() {
            if la == 0.0 {
                continue;
            }
            let row = &mut acc[a * width..(a + 1) * width];
            for (o, &e) in row.iter_mut().zip(early) {
                *o += la * e;
            }
        }
    }
    out
}

fn row_autocov_centered(centered: &[f64], n: usize, p: usize, q: usize, k: usize) -> Matrix {
    lagged_cross_product(centered, q, k * p).scale(1.0 / (n * p) as f64)
}

/// `(1/(n p)) sum_{t < n-k} (Y_{t+k} - Ybar)^T (Y_t - Ybar)`.
pub fn row_autocov(series: &MatrixSeries, k: usize) -> Result<LagCov> {
    check_lag(series, k)?;
    let c = series.centered();
    let entries = row_autocov_centered(&c, series.n(), series.p(), series.q(), k);
    Ok(LagCov { lag: k, entries })
}

/// `(1/n) sum_{t < n-h} (y_{i:}^{t+h} - ybar_{i:})^T (y_{j:}^t - ybar_{j:})`.
pub fn pair_autocov(series: &MatrixSeries, i: usize, j: usize, h: usize) -> Result<RowPairCov> {
    let p = series.p();
    if i >= p || j >= p {
        return Err(invalid(format!("row index out of range for p = {p}")));
    }
    check_lag(series, h)?;
    let all = all_pair_autocov(series, h)?;
    let q = series.q();
    Ok(RowPairCov { i, j, lag: h, entries: all.block(i * q, j * q, q, q) })
}

/// Every row-pair covariance at lag `h` at once, as a `pq x pq` matrix
/// whose `(i, j)` block of size `q x q` is [`pair_autocov`]`(i, j, h)`.
pub fn all_pair_autocov(series: &MatrixSeries, h: usize) -> Result<Matrix> {
    check_lag(series, h)?;
    let c = series.centered();
    Ok(all_pair_autocov_centered(&c, series.n(), series.p() * series.q(), h))
}

pub(crate) fn all_pair_autocov_centered(centered: &[f64], n: usize, width: usize, h: usize) -> Matrix {
    lagged_cross_product(centered, width, h).scale(1.0 / n as f64)
}

/// Entrywise hard thresholding: entries with `|m_ij| < u` become zero.
/// With `keep_diagonal`, diagonal entries are never zeroed.
pub fn hard_threshold(m: &Matrix, u: f64, keep_diagonal: bool) -> Result<Matrix> {
    if !(u >= 0.0) {
        return Err(invalid("threshold must be non-negative"));
    }
    let mut out = m.clone();
    let cols = out.cols();
    for (idx, x) in out.as_mut_slice().iter_mut().enumerate() {
        if keep_diagonal && idx / cols == idx % cols {
            continue;
        }
        if x.abs() < u {
            *x = 0.0;
        }
    }
    Ok(out)
}

fn lag_threshold(list: Option<&[f64]>, k: usize) -> Result<Option<f64>> {
    match list {
        None => Ok(None),
        Some(l) => l.get(k).copied().map(Some).ok_or_else(|| invalid(format!("no threshold supplied for lag {k}"))),
    }
}

/// `I_q + sum_{k=1}^{k0} T_{u_k}(S(k)) T_{u_k}(S(k))^T` with `S(k)` the
/// row autocovariance at lag `k`.
pub fn w_stat(series: &MatrixSeries, k0: usize, u_per_lag: Option<&[f64]>) -> Result<SymMatrix> {
    if k0 == 0 {
        return Err(invalid("k0 must be at least 1"));
    }
    check_lag(series, k0)?;
    let (n, p, q) = (series.n(), series.p(), series.q());
    let c = series.centered();
    let mut w = Matrix::identity(q);
    for k in 1..=k0 {
        let mut s = row_autocov_centered(&c, n, p, q, k);
        if let Some(u) = lag_threshold(u_per_lag, k)? {
            s = hard_threshold(&s, u, false)?;
        }
        w.add_assign(&s.gram_outer());
    }
    SymMatrix::new(w)
}

/// Row-pair variant: `(1/p^2) sum_{k=0}^{k0} sum_{i,j} T_v(S_ij(k)) T_v(S_ij(k))^T`.
/// As everywhere, lag-0 thresholding spares the variances.
pub fn w_stat_rowpair(series: &MatrixSeries, k0: usize, v_per_lag: Option<&[f64]>) -> Result<SymMatrix> {
    if k0 == 0 {
        return Err(invalid("k0 must be at least 1"));
    }
    check_lag(series, k0)?;
    let (n, p, q) = (series.n(), series.p(), series.q());
    let c = series.centered();
    let mut w = Matrix::zeros(q, q);
    for k in 0..=k0 {
        let mut all = all_pair_autocov_centered(&c, n, p * q, k);
        if let Some(v) = lag_threshold(v_per_lag, k)? {
            all = hard_threshold(&all, v, k == 0)?;
        }
        for i in 0..p {
            for j in 0..p {
                w.add_assign(&all.block(i * q, j * q, q, q).gram_outer());
            }
        }
    }
    SymMatrix::new(w.scale(1.0 / (p * p) as f64))
}
