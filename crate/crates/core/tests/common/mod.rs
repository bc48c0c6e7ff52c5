//! Shared helpers: random inputs and brute-force reference implementations
//! written directly from the definitions, one index at a time.

#![allow(dead_code, clippy::needless_range_loop)]

use matseg_core::{Matrix, MatrixSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_series(rng: &mut impl Rng, n: usize, p: usize, q: usize) -> MatrixSeries {
    let data = (0..n * p * q).map(|_| rng.sample(StandardNormal)).collect();
    MatrixSeries::new(n, p, q, data).unwrap()
}

/// Each entry an independent AR(1) with coefficient `phi[col]`.
pub fn ar_columns(rng: &mut impl Rng, n: usize, p: usize, phi: &[f64]) -> MatrixSeries {
    let q = phi.len();
    let mut state = vec![0.0; p * q];
    let mut data = Vec::with_capacity(n * p * q);
    for t in 0..n + 100 {
        for r in 0..p {
            for c in 0..q {
                let e: f64 = rng.sample(StandardNormal);
                state[r * q + c] = phi[c] * state[r * q + c] + e;
            }
        }
        if t >= 100 {
            data.extend_from_slice(&state);
        }
    }
    MatrixSeries::new(n, p, q, data).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Orthogonal matrix from Gram-Schmidt on a random square matrix.
pub fn random_orthogonal(rng: &mut impl Rng, q: usize) -> Matrix {
    let m = random_matrix(rng, q, q);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..q {
        let mut v = m.column(j);
        for u in &cols {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    Matrix::from_fn(q, q, |i, j| cols[j][i])
}

pub fn naive_mul(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum())
}

pub fn naive_transpose(a: &Matrix) -> Matrix {
    Matrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)])
}

fn means(s: &MatrixSeries) -> Vec<Vec<f64>> {
    (0..s.p())
        .map(|r| (0..s.q()).map(|c| (0..s.n()).map(|t| s.get(t, r, c)).sum::<f64>() / s.n() as f64).collect())
        .collect()
}

pub fn row_autocov_bf(s: &MatrixSeries, k: usize) -> Matrix {
    let m = means(s);
    Matrix::from_fn(s.q(), s.q(), |a, b| {
        let mut acc = 0.0;
        for t in 0..s.n() - k {
            for r in 0..s.p() {
                acc += (s.get(t + k, r, a) - m[r][a]) * (s.get(t, r, b) - m[r][b]);
            }
        }
        acc / (s.n() * s.p()) as f64
    })
}

pub fn pair_autocov_bf(s: &MatrixSeries, i: usize, j: usize, h: usize) -> Matrix {
    let m = means(s);
    Matrix::from_fn(s.q(), s.q(), |a, b| {
        let mut acc = 0.0;
        for t in 0..s.n() - h {
            acc += (s.get(t + h, i, a) - m[i][a]) * (s.get(t, j, b) - m[j][b]);
        }
        acc / s.n() as f64
    })
}

pub fn threshold_bf(m: &Matrix, u: f64, keep_diag: bool) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        let x = m[(i, j)];
        if (keep_diag && i == j) || x.abs() >= u {
            x
        } else {
            0.0
        }
    })
}

pub fn w_stat_bf(s: &MatrixSeries, k0: usize, u: Option<&[f64]>) -> Matrix {
    let mut w = Matrix::identity(s.q());
    for k in 1..=k0 {
        let mut sk = row_autocov_bf(s, k);
        if let Some(u) = u {
            sk = threshold_bf(&sk, u[k], false);
        }
        w = w.add(&naive_mul(&sk, &naive_transpose(&sk)));
    }
    w
}

pub fn w_stat_rowpair_bf(s: &MatrixSeries, k0: usize, v: Option<&[f64]>) -> Matrix {
    let mut w = Matrix::zeros(s.q(), s.q());
    for k in 0..=k0 {
        for i in 0..s.p() {
            for j in 0..s.p() {
                let mut sij = pair_autocov_bf(s, i, j, k);
                if let Some(v) = v {
                    // at lag 0 the variances (diagonal of the pq x pq matrix) survive
                    sij = Matrix::from_fn(sij.rows(), sij.cols(), |a, b| {
                        let x = sij[(a, b)];
                        let diagonal = k == 0 && i == j && a == b;
                        if diagonal || x.abs() >= v[k] {
                            x
                        } else {
                            0.0
                        }
                    });
                }
                w = w.add(&naive_mul(&sij, &naive_transpose(&sij)));
            }
        }
    }
    w.scale(1.0 / (s.p() * s.p()) as f64)
}

pub fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Connected components by depth-first search, sorted like the library's.
pub fn components_dfs(edges: &[(usize, usize)], q: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); q];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; q];
    let mut out = Vec::new();
    for start in 0..q {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
