//! Tensor-valued series: mode matricization and the sequential per-mode
//! segmentation.
//!
//! Modes are numbered from 1. Tensors are stored flat with index 1
//! varying fastest, so entry `(i_1, ..., i_r)` (0-based indices) sits at
//! `i_1 + p_1 (i_2 + p_2 (i_3 + ...))`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::segmentation::{segment, SegmentationConfig, SegmentationResult};
use crate::series::MatrixSeries;

/// A series of `n` order-`r` tensors of common shape `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries {
    n: usize,
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn volume(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(invalid("a tensor needs at least two modes"));
    }
    if dims.contains(&0) {
        return Err(invalid("tensor dimensions must be positive"));
    }
    Ok(())
}

fn check_mode(dims: &[usize], mode: usize) -> Result<()> {
    if mode == 0 || mode > dims.len() {
        return Err(invalid(format!("mode {mode} out of range for an order-{} tensor", dims.len())));
    }
    Ok(())
}

/// Calls `f(flat, row, col)` for every entry, where `(row, col)` is the
/// entry's position in the mode-`mode` unfolding.
fn for_each_unfolded(dims: &[usize], mode: usize, mut f: impl FnMut(usize, usize, usize)) {
    let m = mode - 1;
    let mut idx = vec![0usize; dims.len()];
    for flat in 0..volume(dims) {
        let mut col = 0;
        let mut stride = 1;
        for (d, (&i, &p)) in idx.iter().zip(dims).enumerate() {
            if d != m {
                col += i * stride;
                stride *= p;
            }
        }
        f(flat, idx[m], col);
        for (i, &p) in idx.iter_mut().zip(dims) {
            *i += 1;
            if *i < p {
                break;
            }
            *i = 0;
        }
    }
}

/// Mode-`mode` unfolding of a flat tensor: a `p_mode x prod_{i != mode} p_i`
/// matrix whose columns are the mode fibers, remaining indices ordered
/// with the lowest mode fastest.
pub fn matricize(data: &[f64], dims: &[usize], mode: usize) -> Result<Matrix> {
    check_dims(dims)?;
    check_mode(dims, mode)?;
    if data.len() != volume(dims) {
        return Err(invalid("tensor data does not match its dimensions"));
    }
    let rows = dims[mode - 1];
    let cols = volume(dims) / rows;
    let mut out = Matrix::zeros(rows, cols);
    for_each_unfolded(dims, mode, |flat, r, c| out[(r, c)] = data[flat]);
    Ok(out)
}

/// Inverse of [`matricize`].
pub fn tensorize(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Vec<f64>> {
    check_dims(dims)?;
    check_mode(dims, mode)?;
    let rows = dims[mode - 1];
    if m.rows() != rows || m.cols() * rows != volume(dims) {
        return Err(invalid(format!(
            "a {} x {} matrix cannot be folded at mode {mode} into shape {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = vec![0.0; volume(dims)];
    for_each_unfolded(dims, mode, |flat, r, c| out[flat] = m[(r, c)]);
    Ok(out)
}

impl TensorSeries {
    pub fn new(n: usize, dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_dims(&dims)?;
        if n < 2 {
            return Err(invalid("a series needs at least two observations"));
        }
        if data.len() != n * volume(&dims) {
            return Err(invalid("tensor series data does not match n and dimensions"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("tensor series entries must be finite"));
        }
        Ok(TensorSeries { n, dims, data })
    }

    /// A matrix series viewed as order-2 tensors.
    pub fn from_matrix_series(series: &MatrixSeries) -> Self {
        let (p, q) = (series.p(), series.q());
        let mut data = Vec::with_capacity(series.as_slice().len());
        for t in 0..series.n() {
            for c in 0..q {
                for r in 0..p {
                    data.push(series.get(t, r, c));
                }
            }
        }
        TensorSeries { n: series.n(), dims: vec![p, q], data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn observation(&self, t: usize) -> &[f64] {
        let v = volume(&self.dims);
        &self.data[t * v..(t + 1) * v]
    }

    /// Transposed mode unfoldings `Y_t^{(mode) T}` as a matrix series, so
    /// that the mode's index runs along the columns.
    pub fn unfold_series(&self, mode: usize) -> Result<MatrixSeries> {
        check_mode(&self.dims, mode)?;
        let q = self.dims[mode - 1];
        let p = volume(&self.dims) / q;
        let mut data = Vec::with_capacity(self.data.len());
        for t in 0..self.n {
            let m = matricize(self.observation(t), &self.dims, mode)?.transpose();
            data.extend_from_slice(m.as_slice());
        }
        MatrixSeries::new(self.n, p, q, data)
    }

    /// Inverse of [`TensorSeries::unfold_series`].
    pub fn fold_series(series: &MatrixSeries, mode: usize, dims: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(series.as_slice().len());
        for t in 0..series.n() {
            data.extend(tensorize(&series.matrix(t).transpose(), mode, dims)?);
        }
        TensorSeries::new(series.n(), dims.to_vec(), data)
    }
}

/// Outcome for one mode. Modes of dimension 1 are skipped with
/// `Err(Error::SingleColumn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub mode: usize,
    pub outcome: Result<SegmentationResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialResult {
    pub modes: Vec<ModeResult>,
    pub transformed: TensorSeries,
}

/// Segments every mode in turn, each pass acting on the output of the
/// previous one. Mode `m` segments the `p_m` fibers: the series of
/// transposed mode-`m` unfoldings goes through [`segment`] and its
/// transformed series is folded back into tensors.
pub fn sequential_segment(series: &TensorSeries, cfg: &SegmentationConfig) -> Result<SequentialResult> {
    cfg.validate()?;
    let mut current = series.clone();
    let mut modes = Vec::with_capacity(series.order());
    for mode in 1..=series.order() {
        if series.dims[mode - 1] == 1 {
            modes.push(ModeResult { mode, outcome: Err(Error::SingleColumn) });
            continue;
        }
        let unfolded = current.unfold_series(mode)?;
        let result = segment(&unfolded, cfg)?;
        current = TensorSeries::fold_series(&result.transformed, mode, &series.dims)?;
        modes.push(ModeResult { mode, outcome: Ok(result) });
    }
    Ok(SequentialResult { modes, transformed: current })
}
