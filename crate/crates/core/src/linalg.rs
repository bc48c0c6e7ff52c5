//! Dense symmetric eigen-decomposition and the subspace discrepancy.
//!
//! Everything here is deterministic: eigenvalues come out in descending
//! order, each eigenvector has its largest-magnitude entry positive, and
//! eigenvectors of (numerically) equal eigenvalues are ordered
//! lexicographically.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

const MAX_SWEEPS: usize = 100;
/// Relative gap under which two eigenvalues count as tied.
const EIG_TIE_TOL: f64 = 1e-12;
/// Relative magnitude under which two entries count as equally large when
/// picking the sign-defining entry.
const SIGN_TIE_TOL: f64 = 1e-9;
/// Smallest admissible ratio of extreme singular values for a [`Basis`].
pub const RANK_TOL: f64 = 1e-7;

/// Default relative clamp for [`inv_sqrt_psd`].
pub const DEFAULT_EIG_CLAMP: f64 = 1e-10;

/// A real symmetric matrix. Symmetry is exact: the input is averaged with
/// its transpose on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(invalid("symmetric matrix must be square with dim >= 1"));
        }
        if !m.is_finite() {
            return Err(invalid("matrix has non-finite entries"));
        }
        let n = m.rows();
        let sym = Matrix::from_fn(n, n, |i, j| if i == j { m[(i, i)] } else { 0.5 * (m[(i, j)] + m[(j, i)]) });
        Ok(SymMatrix(sym))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eig(s: &SymMatrix) -> Result<Eigen> {
    let n = s.dim();
    let mut a = s.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let fro_sq = a.frobenius_sq();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
        if off <= 1e-30 * fro_sq || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!("Jacobi eigen-solver did not converge in {MAX_SWEEPS} sweeps")));
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut vectors: Vec<Vec<f64>> = (0..n).map(|j| v.column(j)).collect();
    for vec in vectors.iter_mut() {
        fix_sign(vec);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].partial_cmp(&values[x]).unwrap_or(Ordering::Equal).then(x.cmp(&y)));

    // Reorder each run of tied eigenvalues lexicographically (descending).
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end - 1]] - values[order[end]] <= EIG_TIE_TOL * scale {
            end += 1;
        }
        order[start..end].sort_by(|&x, &y| lex_desc(&vectors[x], &vectors[y]));
        start = end;
    }

    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = Matrix::from_fn(n, n, |i, j| vectors[order[j]][i]);
    Ok(Eigen { values: sorted_values, vectors: sorted_vectors })
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    // Entry is already negligible next to both diagonals.
    if apq.abs() <= f64::EPSILON * 1e-3 * app.abs().min(aqq.abs()) {
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let r = libm::sqrt(theta * theta + 1.0);
        if theta >= 0.0 {
            1.0 / (theta + r)
        } else {
            -1.0 / (-theta + r)
        }
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;
    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Makes the largest-magnitude entry positive (lowest index on ties).
fn fix_sign(vec: &mut [f64]) {
    let max = vec.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = vec.iter().position(|x| x.abs() >= max * (1.0 - SIGN_TIE_TOL)).unwrap_or(0);
    if vec[lead] < 0.0 {
        for x in vec.iter_mut() {
            *x = -*x;
        }
    }
}

fn lex_desc(x: &[f64], y: &[f64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        match b.partial_cmp(a) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// `V diag(max(lambda, eps * lambda_max)^(-1/2)) V^T` for a positive
/// semi-definite `S`.
pub fn inv_sqrt_psd(s: &SymMatrix, eps: f64) -> Result<SymMatrix> {
    if !(eps > 0.0) {
        return Err(invalid("eigenvalue clamp must be positive"));
    }
    let eig = sym_eig(s)?;
    let lmax = eig.values[0];
    if !(lmax > 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    let floor = eps * lmax;
    let w: Vec<f64> = eig.values.iter().map(|&l| 1.0 / libm::sqrt(l.max(floor))).collect();
    SymMatrix::new(spectral(&eig.vectors, &w))
}

/// `V diag(w) V^T`.
pub(crate) fn spectral(v: &Matrix, w: &[f64]) -> Matrix {
    let n = v.rows();
    let scaled = Matrix::from_fn(n, w.len(), |i, k| v[(i, k)] * w[k]);
    scaled.matmul(&v.transpose())
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    let g = SymMatrix::new(m.tr_matmul(m))?;
    let eig = sym_eig(&g)?;
    Ok(libm::sqrt(eig.values[0].max(0.0)))
}

/// A full-column-rank matrix spanning a subspace.
#[derive(Debug, Clone)]
pub struct Basis {
    entries: Matrix,
    /// Orthonormal basis of the same column space.
    orthonormal: Matrix,
}

impl Basis {
    pub fn new(entries: Matrix) -> Result<Self> {
        if entries.cols() == 0 || entries.cols() > entries.rows() {
            return Err(invalid("basis must have 1 <= cols <= rows"));
        }
        if !entries.is_finite() {
            return Err(invalid("basis has non-finite entries"));
        }
        let gram = SymMatrix::new(entries.tr_matmul(&entries))?;
        let eig = sym_eig(&gram)?;
        let smax = libm::sqrt(eig.values[0].max(0.0));
        let smin = libm::sqrt(eig.values[eig.values.len() - 1].max(0.0));
        if !(smax > 0.0) || smin <= RANK_TOL * smax {
            return Err(invalid("basis is rank deficient"));
        }
        let w: Vec<f64> = eig.values.iter().map(|&l| 1.0 / libm::sqrt(l)).collect();
        let orthonormal = entries.matmul(&spectral(&eig.vectors, &w));
        Ok(Basis { entries, orthonormal })
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn rank(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn orthonormal(&self) -> &Matrix {
        &self.orthonormal
    }
}

/// Discrepancy `sqrt(1 - tr(P1 P2) / min(r1, r2))` between two column
/// spaces. Zero iff one space contains the other, one iff they are
/// orthogonal.
pub fn subspace_distance(h1: &Basis, h2: &Basis) -> Result<f64> {
    if h1.rows() != h2.rows() {
        return Err(invalid("bases live in spaces of different dimension"));
    }
    // tr(P1 P2) = ||Q1^T Q2||_F^2 for orthonormal Q1, Q2.
    let cross = h1.orthonormal().tr_matmul(h2.orthonormal());
    let r = h1.rank().min(h2.rank()) as f64;
    let radicand = (1.0 - cross.frobenius_sq() / r).clamp(0.0, 1.0);
    Ok(libm::sqrt(radicand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_eigen() {
        let e = sym_eig(&sym(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(e.vectors.column(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.vectors.column(2), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two_eigen() {
        let e = sym_eig(&sym(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert!((v0[0] - r).abs() < 1e-14 && (v0[1] - r).abs() < 1e-14);
        assert!((v1[0] - r).abs() < 1e-14 && (v1[1] + r).abs() < 1e-14);
    }

    #[test]
    fn identity_ties_are_ordered() {
        let e = sym_eig(&SymMatrix::identity(4)).unwrap();
        assert_eq!(e.vectors, Matrix::identity(4));
    }

    #[test]
    fn non_finite_rejected() {
        let m = Matrix::from_rows(&[&[1.0, f64::NAN], &[0.0, 1.0]]).unwrap();
        assert!(matches!(SymMatrix::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn inv_sqrt_examples() {
        let id = inv_sqrt_psd(&SymMatrix::identity(3), DEFAULT_EIG_CLAMP).unwrap();
        assert!(id.as_matrix().sub(&Matrix::identity(3)).max_abs() < 1e-15);

        let d = inv_sqrt_psd(&sym(&[&[4.0, 0.0], &[0.0, 9.0]]), DEFAULT_EIG_CLAMP).unwrap();
        assert!((d.as_matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((d.as_matrix()[(1, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.as_matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn inv_sqrt_clamps_small_eigenvalues() {
        let s = sym(&[&[1.0, 0.0], &[0.0, 1e-18]]);
        let r = inv_sqrt_psd(&s, 1e-10).unwrap();
        assert!((r.as_matrix()[(1, 1)] - 1e5).abs() < 1e-6);
        // r S r is the projector onto the unclamped eigenspace.
        let rsr = r.as_matrix().matmul(s.as_matrix()).matmul(r.as_matrix());
        assert!((rsr[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(rsr[(1, 1)].abs() < 1e-7);
    }

    #[test]
    fn inv_sqrt_rejects_non_positive() {
        let s = sym(&[&[0.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(inv_sqrt_psd(&s, 1e-10).unwrap_err(), Error::DegenerateCovariance);
    }

    fn basis(rows: &[&[f64]]) -> Basis {
        Basis::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e1 = basis(&[&[1.0], &[0.0]]);
        let e2 = basis(&[&[0.0], &[1.0]]);
        let diag = basis(&[&[1.0], &[1.0]]);
        assert!(subspace_distance(&e1, &e1).unwrap() < 1e-12);
        assert!((subspace_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-12);
        let d = subspace_distance(&e1, &diag).unwrap();
        assert!((d - libm::sqrt(0.5)).abs() < 1e-12);

        let plane = basis(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        let line = basis(&[&[1.0], &[0.0], &[0.0]]);
        assert!(subspace_distance(&plane, &line).unwrap() < 1e-12);
    }

    #[test]
    fn rank_deficient_basis_rejected() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(Basis::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let m = Matrix::from_rows(&[&[-3.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert!((operator_norm(&m).unwrap() - 3.0).abs() < 1e-14);
    }
}
