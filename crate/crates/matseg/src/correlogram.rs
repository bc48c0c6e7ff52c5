//! Plot-ready cross correlograms of raw or transformed columns.

use std::fmt::Write as _;

use matseg_core::segmentation::lagged_max_corr;
use matseg_core::threshold_cv::{cv_threshold_pair, CvPlan};
use matseg_core::{Matrix, MatrixSeries, ThresholdMode};

use crate::error::Result;

/// `value = max_{k,l} |corr(row k of column i at t+h, row l of column j at t)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelogramRow {
    pub i: usize,
    pub j: usize,
    pub h: usize,
    pub value: f64,
}

/// Row-pair thresholds for lags `0..=m` under a threshold mode.
pub fn pair_thresholds(series: &MatrixSeries, mode: &ThresholdMode, m: usize, seed: u64) -> Result<Option<Vec<f64>>> {
    Ok(match *mode {
        ThresholdMode::None => None,
        ThresholdMode::Fixed { v, .. } => Some(vec![v; m + 1]),
        ThresholdMode::CrossValidated { splits } => {
            let plan = CvPlan::new(splits, seed);
            Some(
                (0..=m)
                    .map(|h| cv_threshold_pair(series, h, &plan).map(|s| s.threshold))
                    .collect::<std::result::Result<_, _>>()?,
            )
        }
    })
}

/// Every pair `i <= j` (0-based) at lags `0..=m`, ordered by `i`, `j`,
/// then `h`. With `transform = Some((standardizer, gamma))` the columns of
/// `Y_t standardizer gamma` are used; otherwise the raw columns.
pub fn correlogram(
    series: &MatrixSeries,
    transform: Option<(&Matrix, &Matrix)>,
    m: usize,
    mode: &ThresholdMode,
    seed: u64,
) -> Result<Vec<CorrelogramRow>> {
    let (input, gamma) = match transform {
        Some((standardizer, gamma)) => (series.right_mul(standardizer), gamma.clone()),
        None => (series.clone(), Matrix::identity(series.q())),
    };
    let v = pair_thresholds(&input, mode, m, seed)?;
    let per_lag = lagged_max_corr(&input, &gamma, m, v.as_deref())?;
    let q = series.q();
    let mut rows = Vec::with_capacity(q * (q + 1) / 2 * (m + 1));
    for i in 0..q {
        for j in i..q {
            for (h, mh) in per_lag.iter().enumerate() {
                rows.push(CorrelogramRow { i, j, h, value: mh[(i, j)] });
            }
        }
    }
    Ok(rows)
}

/// CSV with header `i,j,h,max_abs_corr` and 1-based column indices.
pub fn to_csv(rows: &[CorrelogramRow]) -> String {
    let mut out = String::from("i,j,h,max_abs_corr\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.i + 1, r.j + 1, r.h, r.value).expect("writing to a String");
    }
    out
}
