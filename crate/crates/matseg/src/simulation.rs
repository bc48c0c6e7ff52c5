//! Data generators for the three simulated designs and the Monte-Carlo
//! evaluation protocol.
//!
//! Every design mixes independent VARMA(1,1) factor processes into the
//! columns of `X_t` and observes `Y_t = X_t A^T`. Within a factor group,
//! column `i` of the group is the factor process shifted forward by `i`
//! steps, so columns of one group are correlated at nonzero lags while
//! columns of different groups are independent.

use std::fmt;

use matseg_core::linalg::{operator_norm, subspace_distance, Basis};
use matseg_core::{segment, Matrix, MatrixSeries, SegmentationConfig, SegmentationResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

const BURN_IN: usize = 200;

/// The three simulated designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    /// `p = 3`, `q = 6`, groups of 3, 2 and 1 columns, dense uniform `A`.
    One,
    /// As `One` with `p = q = 6`.
    Two,
    /// `p = q = 10`, groups of 4, 3, 2 and 1 columns, block-rotation `A`.
    Three,
}

impl Example {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Example::One),
            2 => Ok(Example::Two),
            3 => Ok(Example::Three),
            _ => Err(Error::Core(matseg_core::Error::InvalidInput(format!("unknown example {id}")))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Example::One => 1,
            Example::Two => 2,
            Example::Three => 3,
        }
    }

    pub fn p(self) -> usize {
        match self {
            Example::One => 3,
            Example::Two => 6,
            Example::Three => 10,
        }
    }

    pub fn group_sizes(self) -> &'static [usize] {
        match self {
            Example::One | Example::Two => &[3, 2, 1],
            Example::Three => &[4, 3, 2, 1],
        }
    }

    pub fn q(self) -> usize {
        self.group_sizes().iter().sum()
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// The mixing matrix and true column groups of `X_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub a_true: Matrix,
    pub partition: Vec<Vec<usize>>,
}

impl GroundTruth {
    pub fn q1(&self) -> usize {
        self.partition.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.partition.iter().map(Vec::len).collect()
    }
}

/// Parameters of `eta_t = Phi eta_{t-1} + eps_t - Theta eps_{t-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Varma {
    pub phi: Matrix,
    pub theta: Matrix,
}

impl Varma {
    /// `Phi` uniform on `(-3, 3)` rescaled to operator norm 0.9, `Theta`
    /// uniform on `(-1, 1)`.
    pub fn draw<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Core(matseg_core::Error::InvalidInput("dimension must be positive".into())));
        }
        let raw = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-3.0..3.0));
        let norm = operator_norm(&raw)?;
        if !(norm > 0.0) {
            return Err(Error::Core(matseg_core::Error::NumericalFailure("autoregressive matrix vanished".into())));
        }
        let phi = raw.scale(0.9 / norm);
        let theta = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        Ok(Varma { phi, theta })
    }

    /// `len` consecutive observations after a burn-in, flat `len x dim`.
    pub fn path<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<f64> {
        let dim = self.phi.rows();
        let mut eta: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut eps_prev: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = Vec::with_capacity(len * dim);
        for step in 0..BURN_IN + len {
            let eps: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let next: Vec<f64> = (0..dim)
                .map(|a| {
                    let mut v = eps[a];
                    for b in 0..dim {
                        v += self.phi[(a, b)] * eta[b] - self.theta[(a, b)] * eps_prev[b];
                    }
                    v
                })
                .collect();
            eta = next;
            eps_prev = eps;
            if step >= BURN_IN {
                out.extend_from_slice(&eta);
            }
        }
        out
    }
}

/// A fresh VARMA(1,1) path of `n_total` observations of a `dim`-vector.
pub fn gen_factor_varma<R: Rng + ?Sized>(dim: usize, n_total: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n_total == 0 {
        return Err(Error::Core(matseg_core::Error::InvalidInput("path length must be positive".into())));
    }
    Ok(Varma::draw(dim, rng)?.path(n_total, rng))
}

/// The block-rotation mixing matrix of the third design.
pub fn rotation_mixing() -> Matrix {
    use std::f64::consts::PI;
    let thetas = [PI / 5.0, PI / 6.0, PI / 7.0, PI / 8.0, PI / 9.0];
    let mut m = vec![0.0; 100];
    for (b, th) in thetas.iter().enumerate() {
        let (s, c) = (th * PI).sin_cos();
        let o = 2 * b;
        m[o * 10 + o] = c;
        m[o * 10 + o + 1] = s;
        m[(o + 1) * 10 + o] = -s;
        m[(o + 1) * 10 + o + 1] = c;
    }
    Matrix::from_vec(10, 10, m).expect("10 x 10")
}

/// Latent series `X_t` with shifted factor columns, plus its partition.
pub fn gen_latent<R: Rng + ?Sized>(example: Example, n: usize, rng: &mut R) -> Result<(MatrixSeries, Vec<Vec<usize>>)> {
    let (p, q) = (example.p(), example.q());
    let mut data = vec![0.0; n * p * q];
    let mut partition = Vec::new();
    let mut first = 0;
    for &size in example.group_sizes() {
        let path = gen_factor_varma(p, n + size - 1, rng)?;
        for shift in 0..size {
            let col = first + shift;
            for t in 0..n {
                let src = &path[(t + shift) * p..(t + shift + 1) * p];
                for (r, &x) in src.iter().enumerate() {
                    data[t * p * q + r * q + col] = x;
                }
            }
        }
        partition.push((first..first + size).collect());
        first += size;
    }
    Ok((MatrixSeries::new(n, p, q, data)?, partition))
}

/// One simulated data set `Y_t = X_t A^T` with its ground truth.
pub fn gen_example<R: Rng + ?Sized>(example: Example, n: usize, rng: &mut R) -> Result<(MatrixSeries, GroundTruth)> {
    if n < 50 {
        return Err(Error::Core(matseg_core::Error::InvalidInput(format!("n must be at least 50, got {n}"))));
    }
    let (x, partition) = gen_latent(example, n, rng)?;
    let q = example.q();
    let a_true = match example {
        Example::One | Example::Two => Matrix::from_fn(q, q, |_, _| rng.random_range(-3.0..3.0)),
        Example::Three => rotation_mixing(),
    };
    let y = x.right_mul(&a_true.transpose());
    Ok((y, GroundTruth { a_true, partition }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Correct,
    NearComplete,
    Incorrect,
}

fn sorted_sizes(groups: &[Vec<usize>]) -> Vec<usize> {
    let mut s: Vec<usize> = groups.iter().map(Vec::len).collect();
    s.sort_unstable();
    s
}

/// Correct when the group count and the multiset of group sizes both
/// match; near-complete when exactly one group too few was found.
pub fn classify_segmentation(result: &SegmentationResult, truth: &GroundTruth) -> Classification {
    let q1_hat = result.groups.len();
    if q1_hat == truth.q1() && sorted_sizes(&result.groups) == sorted_sizes(&truth.partition) {
        Classification::Correct
    } else if q1_hat + 1 == truth.q1() {
        Classification::NearComplete
    } else {
        Classification::Incorrect
    }
}

/// Cheapest assignment by exhaustive search; `cost[a][b]` pairs estimated
/// group `a` with true group `b`.
fn min_assignment(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if row == cost.len() {
            *best = acc;
            return;
        }
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                go(cost, row + 1, used, acc + cost[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
    best
}

/// Mean subspace distance between the estimated groups of `Gamma` and the
/// matching column blocks of `S^{-1/2} A`. Groups of equal size are paired
/// to minimize the total distance.
pub fn mean_subspace_error(result: &SegmentationResult, truth: &GroundTruth) -> Result<f64> {
    if classify_segmentation(result, truth) != Classification::Correct {
        return Err(Error::Core(matseg_core::Error::InvalidState(
            "estimation error is only defined for correct segmentations".into(),
        )));
    }
    let target = result.standardizer.matmul(&truth.a_true);
    let mut sizes: Vec<usize> = truth.group_sizes();
    sizes.sort_unstable();
    sizes.dedup();
    let mut total = 0.0;
    for size in sizes {
        let est: Vec<Basis> = result
            .groups
            .iter()
            .filter(|g| g.len() == size)
            .map(|g| Basis::new(result.gamma.select_columns(g)))
            .collect::<std::result::Result<_, _>>()?;
        let tru: Vec<Basis> = truth
            .partition
            .iter()
            .filter(|g| g.len() == size)
            .map(|g| Basis::new(target.select_columns(g)))
            .collect::<std::result::Result<_, _>>()?;
        let cost = est
            .iter()
            .map(|e| tru.iter().map(|t| subspace_distance(e, t)).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        total += min_assignment(&cost);
    }
    Ok(total / truth.q1() as f64)
}

/// Generator for replication `rep` at sample size `n`.
pub fn rep_rng(seed: u64, n: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | rep as u64);
    rng
}

/// What happened in one replication.
#[derive(Debug, Clone, PartialEq)]
pub enum RepOutcome {
    Classified { class: Classification, d_bar: Option<f64> },
    Failed(String),
}

/// Runs one replication: generate, segment, classify and, when correct,
/// measure the estimation error.
pub fn run_rep(example: Example, n: usize, rep: usize, cfg: &SegmentationConfig, seed: u64) -> RepOutcome {
    let mut rng = rep_rng(seed, n, rep);
    let mut attempt = || -> Result<RepOutcome> {
        let (y, truth) = gen_example(example, n, &mut rng)?;
        let result = segment(&y, cfg)?;
        let class = classify_segmentation(&result, &truth);
        let d_bar = match class {
            Classification::Correct => Some(mean_subspace_error(&result, &truth)?),
            _ => None,
        };
        Ok(RepOutcome::Classified { class, d_bar })
    };
    attempt().unwrap_or_else(|e| RepOutcome::Failed(e.to_string()))
}

/// Aggregate over the replications at one sample size. Failed replications
/// count as incorrect and are also tallied separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub example: Example,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub correct: usize,
    pub incorrect: usize,
    /// Near-complete runs, a subset of `incorrect`.
    pub near_complete: usize,
    pub failures: usize,
    /// Estimation errors of the correct runs, in replication order.
    pub d_bar: Vec<f64>,
}

fn quantile(sorted: &[f64], level: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl ExperimentReport {
    pub fn correct_rate(&self) -> f64 {
        self.correct as f64 / self.reps as f64
    }

    pub fn incorrect_rate(&self) -> f64 {
        self.incorrect as f64 / self.reps as f64
    }

    pub fn near_complete_rate(&self) -> f64 {
        self.near_complete as f64 / self.reps as f64
    }

    fn sorted_d_bar(&self) -> Vec<f64> {
        let mut s = self.d_bar.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// NaN when no run was correct.
    pub fn d_bar_median(&self) -> f64 {
        quantile(&self.sorted_d_bar(), 0.5)
    }

    pub fn d_bar_quartiles(&self) -> [f64; 3] {
        let s = self.sorted_d_bar();
        [quantile(&s, 0.25), quantile(&s, 0.5), quantile(&s, 0.75)]
    }

    /// NaN when no run was correct.
    pub fn d_bar_mean(&self) -> f64 {
        if self.d_bar.is_empty() {
            return f64::NAN;
        }
        self.d_bar.iter().sum::<f64>() / self.d_bar.len() as f64
    }

    fn from_outcomes(example: Example, n: usize, seed: u64, outcomes: &[RepOutcome]) -> Self {
        let mut report = ExperimentReport {
            example,
            n,
            reps: outcomes.len(),
            seed,
            correct: 0,
            incorrect: 0,
            near_complete: 0,
            failures: 0,
            d_bar: Vec::new(),
        };
        for o in outcomes {
            match o {
                RepOutcome::Classified { class: Classification::Correct, d_bar } => {
                    report.correct += 1;
                    report.d_bar.extend(d_bar);
                }
                RepOutcome::Classified { class, .. } => {
                    report.incorrect += 1;
                    if *class == Classification::NearComplete {
                        report.near_complete += 1;
                    }
                }
                RepOutcome::Failed(_) => {
                    report.incorrect += 1;
                    report.failures += 1;
                }
            }
        }
        report
    }
}

/// Runs `reps` independent replications at each sample size. Replications
/// run on the current rayon pool; results do not depend on its size.
pub fn run_experiment(
    example: Example,
    n_list: &[usize],
    reps: usize,
    cfg: &SegmentationConfig,
    seed: u64,
) -> Result<Vec<ExperimentReport>> {
    if reps == 0 {
        return Err(Error::Usage("reps must be at least 1".into()));
    }
    cfg.validate()?;
    Ok(n_list
        .iter()
        .map(|&n| {
            let outcomes: Vec<RepOutcome> =
                (0..reps).into_par_iter().map(|rep| run_rep(example, n, rep, cfg, seed)).collect();
            ExperimentReport::from_outcomes(example, n, seed, &outcomes)
        })
        .collect())
}
