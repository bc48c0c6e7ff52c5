//! The three-step segmentation of a matrix-valued series.
//!
//! Columns and rows are 0-based throughout. For the standardized series
//! `Y_t` and an orthogonal `Gamma = (v_1, ..., v_q)`, transformed column `i`
//! is `z_i^t = Y_t v_i`, a `p`-vector series. The cross correlation of
//! columns `i` and `j` at lag `h` is the `p x p` matrix with entries
//!
//! ```text
//! v_i^T T_v(S_kl(h)) v_j / (d_ik d_jl),   d_ik^2 = v_i^T T_v(S_kk(0)) v_i
//! ```
//!
//! where `S_kl(h)` is the row-pair covariance of rows `k` and `l`.
//! Negative lags are covered by swapping the two columns.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{invalid, Error, Result};
use crate::estimators::{all_pair_autocov_centered, hard_threshold, row_autocov, w_stat, w_stat_rowpair};
use crate::linalg::{inv_sqrt_psd, sym_eig, SymMatrix, DEFAULT_EIG_CLAMP};
use crate::matrix::Matrix;
use crate::series::MatrixSeries;
use crate::threshold_cv::{cv_threshold_autocov, cv_threshold_pair, CvPlan, DEFAULT_SPLITS};
use crate::union_find::UnionFind;

/// How covariance estimates are thresholded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    None,
    /// One level `u` for every row autocovariance and one level `v` for
    /// every row-pair covariance.
    Fixed {
        u: f64,
        v: f64,
    },
    /// Per-lag levels chosen by cross-validation over `splits` random splits.
    CrossValidated {
        splits: usize,
    },
}

impl ThresholdMode {
    pub fn cross_validated() -> Self {
        ThresholdMode::CrossValidated { splits: DEFAULT_SPLITS }
    }
}

/// Which W statistic supplies the eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistic {
    /// `I + sum_{k=1}^{k0} S(k) S(k)^T` from row autocovariances.
    #[default]
    Lagged,
    /// The average over all row pairs of `S_ij(k) S_ij(k)^T`, `k = 0..=k0`.
    RowPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    /// Lags in the W statistic.
    pub k0: usize,
    /// Largest lag (in absolute value) in the pair scores.
    pub m: usize,
    /// Fraction of the sorted scores searched by the ratio rule.
    pub c0: f64,
    /// Positive shift added to numerator and denominator of every score
    /// ratio; switches the search to all pairs.
    pub ratio_shift: Option<f64>,
    pub threshold: ThresholdMode,
    /// Relative eigenvalue clamp when inverting the covariance.
    pub eps: f64,
    pub statistic: Statistic,
    /// Seed for cross-validation splits.
    pub seed: u64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            k0: 2,
            m: 10,
            c0: 0.75,
            ratio_shift: None,
            threshold: ThresholdMode::None,
            eps: DEFAULT_EIG_CLAMP,
            statistic: Statistic::Lagged,
            seed: 0,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k0 == 0 {
            return Err(invalid("k0 must be at least 1"));
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return Err(invalid("c0 must lie in (0, 1)"));
        }
        if let Some(s) = self.ratio_shift {
            if !(s > 0.0) || !s.is_finite() {
                return Err(invalid("ratio shift must be positive"));
            }
        }
        if !(self.eps > 0.0) {
            return Err(invalid("eigenvalue clamp must be positive"));
        }
        match self.threshold {
            ThresholdMode::Fixed { u, v } if !(u >= 0.0 && v >= 0.0) => Err(invalid("thresholds must be non-negative")),
            ThresholdMode::CrossValidated { splits: 0 } => Err(invalid("cross-validation needs at least one split")),
            _ => Ok(()),
        }
    }
}

/// Per-lag thresholds actually used: `u[k]` for row autocovariances at
/// lags `0..=k0`, `v[h]` for row-pair covariances at lags `0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Maximum cross correlation of an unordered column pair `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    /// Orthogonal `q x q` transformation of the standardized series.
    pub gamma: Matrix,
    /// `S^{-1/2}`, applied on the right of every raw observation.
    pub standardizer: Matrix,
    /// `Y_t S^{-1/2} Gamma`.
    pub transformed: MatrixSeries,
    /// Every unordered pair once, by descending score.
    pub scores: Vec<PairScore>,
    /// Number of leading pairs taken as connected.
    pub selected_edges: usize,
    /// Column groups of `transformed`, ascending within and ordered by
    /// smallest member.
    pub groups: Vec<Vec<usize>>,
    pub thresholds: Option<Thresholds>,
}

impl SegmentationResult {
    /// Result for a single-column series: nothing is transformed.
    pub fn trivial(series: &MatrixSeries) -> Self {
        SegmentationResult {
            gamma: Matrix::identity(series.q()),
            standardizer: Matrix::identity(series.q()),
            transformed: series.clone(),
            scores: Vec::new(),
            selected_edges: 0,
            groups: (0..series.q()).map(|c| vec![c]).collect(),
            thresholds: None,
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Connected pairs `(i, j)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.scores[..self.selected_edges].iter().map(|s| (s.i, s.j)).collect()
    }

    /// Columns of `gamma` gathered by group.
    pub fn a_hat(&self) -> Vec<Matrix> {
        self.groups.iter().map(|g| self.gamma.select_columns(g)).collect()
    }
}

fn degenerate_tol(series: &MatrixSeries, col: usize) -> f64 {
    let (n, p) = (series.n(), series.p());
    let mut ms = 0.0;
    for t in 0..n {
        for r in 0..p {
            let x = series.get(t, r, col);
            ms += x * x;
        }
    }
    1e-28 * ms / (n * p) as f64
}

/// Replaces `Y_t` by `Y_t S^{-1/2}` where `S` is the lag-0 row covariance,
/// hard-thresholded at `u0` (diagonal kept) when given. Returns the
/// standardized series and `S^{-1/2}`.
pub fn standardize(series: &MatrixSeries, u0: Option<f64>, eps: f64) -> Result<(MatrixSeries, Matrix)> {
    let s0 = row_autocov(series, 0)?.entries;
    for c in 0..series.q() {
        if s0[(c, c)] <= degenerate_tol(series, c) {
            return Err(Error::DegenerateColumn(c));
        }
    }
    let s = match u0 {
        Some(u) => hard_threshold(&s0, u, true)?,
        None => s0,
    };
    let root = inv_sqrt_psd(&SymMatrix::new(s)?, eps)?.into_matrix();
    Ok((series.right_mul(&root), root))
}

/// Eigenvectors of the W statistic of a standardized series, by
/// descending eigenvalue.
pub fn estimate_gamma(
    standardized: &MatrixSeries,
    cfg: &SegmentationConfig,
    thresholds: Option<&Thresholds>,
) -> Result<Matrix> {
    let w = match cfg.statistic {
        Statistic::Lagged => w_stat(standardized, cfg.k0, thresholds.map(|t| t.u.as_slice()))?,
        Statistic::RowPair => w_stat_rowpair(standardized, cfg.k0, thresholds.map(|t| t.v.as_slice()))?,
    };
    Ok(sym_eig(&w)?.vectors)
}

/// Row-pair covariances at one lag, all blocks, thresholded.
struct LagBlocks {
    all: Matrix,
    q: usize,
}

impl LagBlocks {
    fn new(centered: &[f64], n: usize, p: usize, q: usize, h: usize, v: Option<&[f64]>) -> Result<Self> {
        let mut all = all_pair_autocov_centered(centered, n, p * q, h);
        if let Some(list) = v {
            let level = *list.get(h).ok_or_else(|| invalid(format!("no threshold supplied for lag {h}")))?;
            all = hard_threshold(&all, level, h == 0)?;
        }
        Ok(LagBlocks { all, q })
    }

    fn block(&self, k: usize, l: usize) -> Matrix {
        self.all.block(k * self.q, l * self.q, self.q, self.q)
    }
}

fn check_series_gamma(series: &MatrixSeries, gamma: &Matrix) -> Result<()> {
    if gamma.rows() != series.q() || gamma.cols() != series.q() {
        return Err(invalid("gamma must be q x q"));
    }
    Ok(())
}

fn check_lag(series: &MatrixSeries, h: usize) -> Result<()> {
    if h + 2 > series.n() {
        return Err(invalid(format!("lag {h} out of range for n = {}", series.n())));
    }
    Ok(())
}

/// Row-wise scales `d[k][i]` of every transformed column.
fn column_scales(lag0: &LagBlocks, gamma: &Matrix, p: usize) -> Result<Matrix> {
    let q = gamma.cols();
    let mut d = Matrix::zeros(p, q);
    for k in 0..p {
        let g = gamma.tr_matmul(&lag0.block(k, k).matmul(gamma));
        for i in 0..q {
            let var = g[(i, i)];
            if !(var > 0.0) {
                return Err(Error::DegenerateVariance { column: i, row: k });
            }
            d[(k, i)] = libm::sqrt(var);
        }
    }
    Ok(d)
}

fn clamp_corr(x: f64, thresholded: bool) -> f64 {
    if thresholded {
        x.clamp(-1.0, 1.0)
    } else {
        x
    }
}

/// `p x p` cross-correlation matrix of transformed columns `i` and `j` at
/// lag `h >= 0`: entry `(k, l)` correlates row `k` of `z_i^{t+h}` with row
/// `l` of `z_j^t`. `v` lists row-pair thresholds by lag (must cover `0` and
/// `h`). Thresholded correlations are clamped to `[-1, 1]`.
pub fn cross_corr(
    standardized: &MatrixSeries,
    gamma: &Matrix,
    i: usize,
    j: usize,
    h: usize,
    v: Option<&[f64]>,
) -> Result<Matrix> {
    check_series_gamma(standardized, gamma)?;
    check_lag(standardized, h)?;
    let (n, p, q) = (standardized.n(), standardized.p(), standardized.q());
    if i >= q || j >= q {
        return Err(invalid("column index out of range"));
    }
    let c = standardized.centered();
    let lag0 = LagBlocks::new(&c, n, p, q, 0, v)?;
    let lagh = if h == 0 { None } else { Some(LagBlocks::new(&c, n, p, q, h, v)?) };
    let blocks = lagh.as_ref().unwrap_or(&lag0);
    let d = column_scales(&lag0, gamma, p)?;
    let mut out = Matrix::zeros(p, p);
    for k in 0..p {
        for l in 0..p {
            let g = gamma.tr_matmul(&blocks.block(k, l).matmul(gamma));
            out[(k, l)] = clamp_corr(g[(i, j)] / (d[(k, i)] * d[(l, j)]), v.is_some());
        }
    }
    Ok(out)
}

/// Maximum absolute cross correlation of columns `i` and `j` over lags
/// `-m..=m`.
pub fn max_cross_corr(
    standardized: &MatrixSeries,
    gamma: &Matrix,
    i: usize,
    j: usize,
    m: usize,
    v: Option<&[f64]>,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for h in 0..=m {
        best = best.max(cross_corr(standardized, gamma, i, j, h, v)?.max_abs());
        best = best.max(cross_corr(standardized, gamma, j, i, h, v)?.max_abs());
    }
    Ok(best)
}

/// Per-lag maxima of the cross correlations: entry `(i, j)` of element
/// `h` is `max_{k,l} |corr(z_ik^{t+h}, z_jl^t)|` for `h = 0..=m`.
pub fn lagged_max_corr(
    standardized: &MatrixSeries,
    gamma: &Matrix,
    m: usize,
    v: Option<&[f64]>,
) -> Result<Vec<Matrix>> {
    check_series_gamma(standardized, gamma)?;
    check_lag(standardized, m)?;
    let (n, p, q) = (standardized.n(), standardized.p(), standardized.q());
    let c = standardized.centered();
    let lag0 = LagBlocks::new(&c, n, p, q, 0, v)?;
    let d = column_scales(&lag0, gamma, p)?;

    let lag_max = |blocks: &LagBlocks| {
        let mut out = Matrix::zeros(q, q);
        for k in 0..p {
            for l in 0..p {
                let g = gamma.tr_matmul(&blocks.block(k, l).matmul(gamma));
                for i in 0..q {
                    for j in 0..q {
                        let r = clamp_corr(g[(i, j)] / (d[(k, i)] * d[(l, j)]), v.is_some()).abs();
                        if r > out[(i, j)] {
                            out[(i, j)] = r;
                        }
                    }
                }
            }
        }
        out
    };
    let mut per_lag = Vec::with_capacity(m + 1);
    per_lag.push(lag_max(&lag0));
    for h in 1..=m {
        per_lag.push(lag_max(&LagBlocks::new(&c, n, p, q, h, v)?));
    }
    Ok(per_lag)
}

/// Scores of all `q(q-1)/2` pairs, by descending score (ties by index).
pub fn pair_scores(standardized: &MatrixSeries, gamma: &Matrix, m: usize, v: Option<&[f64]>) -> Result<Vec<PairScore>> {
    let per_lag = lagged_max_corr(standardized, gamma, m, v)?;
    let q = gamma.cols();
    let mut scores = Vec::with_capacity(q * (q - 1) / 2);
    for i in 0..q {
        for j in i + 1..q {
            let score = per_lag.iter().fold(0.0f64, |acc, mh| acc.max(mh[(i, j)]).max(mh[(j, i)]));
            scores.push(PairScore { i, j, score });
        }
    }
    sort_scores(&mut scores);
    Ok(scores)
}

pub(crate) fn sort_scores(scores: &mut [PairScore]) {
    scores.sort_by(|a, b| {
        b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j))
    });
}

/// Number of connected pairs `d` from descending scores `L_1 >= ... >= L_q0`.
///
/// Without a shift, `d` maximizes `L_j / L_{j+1}` over `1 <= j < c0 q0`
/// (at least `j = 1` is searched) and the first `j` with `L_{j+1} = 0`
/// counts as an infinite ratio. With a shift `s > 0`, `d` maximizes
/// `(L_j + s) / (L_{j+1} + s)` over `1 <= j < q0`. Ties go to the smallest
/// `j`.
pub fn ratio_select(scores: &[f64], c0: f64, shift: Option<f64>) -> Result<usize> {
    let q0 = scores.len();
    if q0 < 2 {
        return Err(invalid("ratio rule needs at least two scores"));
    }
    if scores.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid("scores must be finite and non-negative"));
    }
    if scores.windows(2).any(|w| w[0] < w[1]) {
        return Err(invalid("scores must be sorted in descending order"));
    }
    let ratio = |j: usize| -> f64 {
        let (hi, lo) = (scores[j - 1], scores[j]);
        match shift {
            Some(s) => (hi + s) / (lo + s),
            None if lo == 0.0 => f64::INFINITY,
            None => hi / lo,
        }
    };
    let last = match shift {
        Some(_) => q0 - 1,
        None => {
            let bound = c0 * q0 as f64;
            // largest j with j < c0 q0
            let mut j = libm::ceil(bound) as usize;
            if j as f64 >= bound {
                j = j.saturating_sub(1);
            }
            j.clamp(1, q0 - 1)
        }
    };
    let mut best = 1;
    let mut best_ratio = ratio(1);
    for j in 2..=last {
        let r = ratio(j);
        if r > best_ratio {
            best = j;
            best_ratio = r;
        }
    }
    Ok(best)
}

/// Connected components of the graph on `0..q` with the given edges.
pub fn group_columns(edges: &[(usize, usize)], q: usize) -> Result<Vec<Vec<usize>>> {
    let mut uf = UnionFind::new(q);
    for &(a, b) in edges {
        if a >= q || b >= q {
            return Err(invalid(format!("edge ({a}, {b}) out of range for q = {q}")));
        }
        uf.union(a, b);
    }
    Ok(uf.sets())
}

/// Decision for a lone pair (`q = 2`), where no score ratio exists: the
/// columns are connected when the score exceeds `sqrt(2 ln(2N/0.05) / n)`,
/// a union bound on `N = p^2 (2m + 1)` white-noise correlations.
pub fn lone_pair_connected(score: f64, n: usize, p: usize, m: usize) -> bool {
    let count = (p * p * (2 * m + 1)) as f64;
    let bound = libm::sqrt(2.0 * libm::log(2.0 * count / 0.05) / n as f64);
    score > bound
}

/// Resolves per-lag thresholds; for cross-validation, `u_0` is chosen on
/// the raw series and everything else on the standardized one.
fn resolve_thresholds(
    series: &MatrixSeries,
    cfg: &SegmentationConfig,
) -> Result<(MatrixSeries, Matrix, Option<Thresholds>)> {
    match cfg.threshold {
        ThresholdMode::None => {
            let (std, root) = standardize(series, None, cfg.eps)?;
            Ok((std, root, None))
        }
        ThresholdMode::Fixed { u, v } => {
            let (std, root) = standardize(series, Some(u), cfg.eps)?;
            Ok((std, root, Some(Thresholds { u: vec![u; cfg.k0 + 1], v: vec![v; cfg.m + 1] })))
        }
        ThresholdMode::CrossValidated { splits } => {
            let plan = CvPlan::new(splits, cfg.seed);
            let u0 = cv_threshold_autocov(series, 0, &plan)?.threshold;
            let (std, root) = standardize(series, Some(u0), cfg.eps)?;
            let mut u = vec![u0];
            for k in 1..=cfg.k0 {
                u.push(cv_threshold_autocov(&std, k, &plan)?.threshold);
            }
            let v = (0..=cfg.m)
                .map(|h| cv_threshold_pair(&std, h, &plan).map(|s| s.threshold))
                .collect::<Result<Vec<_>>>()?;
            Ok((std, root, Some(Thresholds { u, v })))
        }
    }
}

/// Full pipeline: standardize, rotate, score pairs, select edges, group.
pub fn segment(series: &MatrixSeries, cfg: &SegmentationConfig) -> Result<SegmentationResult> {
    cfg.validate()?;
    let q = series.q();
    if q == 1 {
        return Err(Error::SingleColumn);
    }
    check_lag(series, cfg.m.max(cfg.k0))?;

    let (standardized, standardizer, thresholds) = resolve_thresholds(series, cfg)?;
    let gamma = estimate_gamma(&standardized, cfg, thresholds.as_ref())?;
    let v = thresholds.as_ref().map(|t| t.v.as_slice());
    let scores = pair_scores(&standardized, &gamma, cfg.m, v)?;

    let selected_edges = if scores.len() == 1 {
        usize::from(lone_pair_connected(scores[0].score, series.n(), series.p(), cfg.m))
    } else {
        let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
        ratio_select(&values, cfg.c0, cfg.ratio_shift)?
    };
    let edges: Vec<(usize, usize)> = scores[..selected_edges].iter().map(|s| (s.i, s.j)).collect();
    let groups = group_columns(&edges, q)?;
    let transformed = standardized.right_mul(&gamma);

    Ok(SegmentationResult { gamma, standardizer, transformed, scores, selected_edges, groups, thresholds })
}
