use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::matrix::Matrix;

/// `n` observations of a `p x q` real matrix, in time order.
///
/// Storage is one flat buffer; observation `t` occupies
/// `data[t*p*q .. (t+1)*p*q]` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSeries {
    n: usize,
    p: usize,
    q: usize,
    data: Vec<f64>,
}

impl MatrixSeries {
    pub fn new(n: usize, p: usize, q: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(invalid("series needs at least two observations"));
        }
        if p == 0 || q == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != n * p * q {
            return Err(invalid("series data length does not match n*p*q"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("series has non-finite entries"));
        }
        Ok(MatrixSeries { n, p, q, data })
    }

    pub fn from_matrices(mats: &[Matrix]) -> Result<Self> {
        let first = mats.first().ok_or_else(|| invalid("empty series"))?;
        let (p, q) = (first.rows(), first.cols());
        if mats.iter().any(|m| m.rows() != p || m.cols() != q) {
            return Err(invalid("observations have different shapes"));
        }
        let data = mats.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
        Self::new(mats.len(), p, q, data)
    }

    /// Length of the series.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Rows per observation.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Columns per observation.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, t: usize, row: usize, col: usize) -> f64 {
        self.data[(t * self.p + row) * self.q + col]
    }

    /// Observation `t` as a flat row-major slice.
    pub fn observation(&self, t: usize) -> &[f64] {
        let w = self.p * self.q;
        &self.data[t * w..(t + 1) * w]
    }

    pub fn matrix(&self, t: usize) -> Matrix {
        Matrix::from_vec(self.p, self.q, self.observation(t).to_vec()).expect("observation has the declared shape")
    }

    /// Every observation multiplied on the right by `m` (`q x q'`).
    pub fn right_mul(&self, m: &Matrix) -> MatrixSeries {
        assert_eq!(m.rows(), self.q, "right_mul shape mismatch");
        let rows =
            Matrix::from_vec(self.n * self.p, self.q, self.data.clone()).expect("flat series reshapes to (n*p) x q");
        let out = rows.matmul(m);
        MatrixSeries { n: self.n, p: self.p, q: m.cols(), data: out.into_vec() }
    }

    /// Every observation transposed.
    pub fn transpose_each(&self) -> MatrixSeries {
        let mut data = Vec::with_capacity(self.data.len());
        for t in 0..self.n {
            for c in 0..self.q {
                for r in 0..self.p {
                    data.push(self.get(t, r, c));
                }
            }
        }
        MatrixSeries { n: self.n, p: self.q, q: self.p, data }
    }

    /// Columns reordered so that new column `k` is old column `perm[k]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<MatrixSeries> {
        if perm.len() != self.q || !is_permutation(perm) {
            return Err(invalid("not a permutation of the columns"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for t in 0..self.n {
            for r in 0..self.p {
                for &c in perm {
                    data.push(self.get(t, r, c));
                }
            }
        }
        Ok(MatrixSeries { n: self.n, p: self.p, q: self.q, data })
    }

    /// Entries minus the full-sample mean matrix, flat `n x (p*q)`.
    pub(crate) fn centered(&self) -> Vec<f64> {
        let w = self.p * self.q;
        let mut mean = alloc::vec![0.0; w];
        for t in 0..self.n {
            for (m, x) in mean.iter_mut().zip(self.observation(t)) {
                *m += x;
            }
        }
        let inv_n = 1.0 / self.n as f64;
        for m in mean.iter_mut() {
            *m *= inv_n;
        }
        let mut out = self.data.clone();
        for t in 0..self.n {
            for (x, m) in out[t * w..(t + 1) * w].iter_mut().zip(&mean) {
                *x -= m;
            }
        }
        out
    }
}

fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = alloc::vec![false; perm.len()];
    for &i in perm {
        if i >= perm.len() || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validates_contract() {
        assert!(MatrixSeries::new(1, 1, 1, vec![0.0]).is_err());
        assert!(MatrixSeries::new(2, 0, 1, vec![]).is_err());
        assert!(MatrixSeries::new(2, 1, 1, vec![0.0, f64::INFINITY]).is_err());
        assert!(MatrixSeries::new(2, 1, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn transpose_and_right_mul() {
        let s = MatrixSeries::new(2, 2, 3, (0..12).map(f64::from).collect()).unwrap();
        let t = s.transpose_each();
        assert_eq!(t.p(), 3);
        assert_eq!(t.get(1, 2, 1), s.get(1, 1, 2));
        assert_eq!(t.transpose_each(), s);
        let id = s.right_mul(&Matrix::identity(3));
        assert_eq!(id, s);
    }
}
