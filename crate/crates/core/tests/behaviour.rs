//! Statistical behaviour on designs whose answer is known.

mod common;

use common::*;
use matseg_core::segmentation::lone_pair_connected;
use matseg_core::{segment, sequential_segment, Matrix, MatrixSeries, SegmentationConfig, TensorSeries};
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn unmixed_independent_columns_give_a_signed_permutation() {
    let mut r = rng(1);
    let y = ar_columns(&mut r, 2000, 3, &[0.9, 0.6, 0.3, -0.5]);
    let res = segment(&y, &SegmentationConfig::default()).unwrap();
    for c in 0..4 {
        let col = res.gamma.column(c);
        let big = col.iter().filter(|x| x.abs() > 0.95).count();
        assert_eq!(big, 1, "column {c} of gamma: {col:?}");
    }
}

#[test]
fn independent_pair_stays_split() {
    let cfg = SegmentationConfig::default();
    let mut split = 0;
    for rep in 0..50 {
        let y = ar_columns(&mut rng(100 + rep), 400, 2, &[0.7, -0.4]);
        let res = segment(&y, &cfg).unwrap();
        split += usize::from(res.group_count() == 2);
    }
    assert!(split >= 45, "split in {split} of 50");
}

#[test]
fn dependent_pair_is_joined() {
    let cfg = SegmentationConfig::default();
    for rep in 0..20 {
        let mut r = rng(200 + rep);
        let x = ar_columns(&mut r, 401, 2, &[0.7]);
        // second column: first one lagged by a step, plus noise
        let mut data = Vec::new();
        for t in 1..401 {
            for row in 0..2 {
                let e: f64 = r.sample(StandardNormal);
                data.extend_from_slice(&[x.get(t, row, 0), x.get(t - 1, row, 0) + 0.5 * e]);
            }
        }
        let y = MatrixSeries::new(400, 2, 2, data).unwrap().right_mul(&random_matrix(&mut r, 2, 2));
        assert_eq!(segment(&y, &cfg).unwrap().group_count(), 1);
    }
}

#[test]
fn white_noise_scores_respect_the_lone_pair_bound() {
    let (n, p, m) = (1000, 3, 10);
    let mut exceed = 0;
    for rep in 0..40 {
        let y = normal_series(&mut rng(300 + rep), n, p, 2);
        let score = segment(&y, &SegmentationConfig::default()).unwrap().scores[0].score;
        exceed += usize::from(lone_pair_connected(score, n, p, m));
    }
    // the bound holds with probability about 0.95 per series
    assert!(exceed <= 6, "bound exceeded in {exceed} of 40");
}

#[test]
fn order_two_tensor_composes_two_matrix_passes() {
    let mut r = rng(4);
    let y = ar_columns(&mut r, 300, 3, &[0.8, -0.5, 0.3, 0.6]).right_mul(&random_matrix(&mut r, 4, 4));
    let cfg = SegmentationConfig::default();
    let seq = sequential_segment(&TensorSeries::from_matrix_series(&y), &cfg).unwrap();

    // mode 1 segments the rows of each observation
    let first = segment(&y.transpose_each(), &cfg).unwrap();
    let second = segment(&first.transformed.transpose_each(), &cfg).unwrap();
    let by_mode = |i: usize| seq.modes[i].outcome.as_ref().unwrap();
    assert_eq!(by_mode(0).groups, first.groups);
    assert_eq!(by_mode(1).groups, second.groups);
    let want = TensorSeries::from_matrix_series(&second.transformed);
    let gap = want.as_slice().iter().zip(seq.transformed.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap <= 1e-10);
}

#[test]
fn unit_modes_are_skipped() {
    let y = normal_series(&mut rng(5), 50, 1, 3);
    let seq = sequential_segment(&TensorSeries::from_matrix_series(&y), &SegmentationConfig::default()).unwrap();
    assert!(seq.modes[0].outcome.is_err());
    assert!(seq.modes[1].outcome.is_ok());
}

/// Index groups per mode: `{0, 1}` and `{2}`.
const GROUP: [usize; 3] = [0, 0, 1];
const POS: [usize; 3] = [0, 1, 0];

/// Order-3 series of shape 3x3x3 with uncorrelated latent groups along every
/// mode, mixed by `mix[m]` along mode `m`.
fn three_mode_series(r: &mut impl Rng, n: usize, mix: &[Matrix; 3]) -> TensorSeries {
    let burn = 100;
    let len = n + burn + 3;
    let latent: Vec<Vec<f64>> = (0..8)
        .map(|_| {
            let phi = r.random_range(0.4..0.9) * if r.random::<bool>() { 1.0 } else { -1.0 };
            let mut x = 0.0;
            (0..len)
                .map(|_| {
                    x = phi * x + r.sample::<f64, _>(StandardNormal);
                    x
                })
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * 27);
    for t in 0..n {
        let at = |a: usize, b: usize, c: usize| {
            let z = &latent[GROUP[a] * 4 + GROUP[b] * 2 + GROUP[c]];
            z[t + burn + 3 - POS[a] - POS[b] - POS[c]]
        };
        // index 1 fastest
        for c in 0..3 {
            for b in 0..3 {
                for a in 0..3 {
                    let mut y = 0.0;
                    for (c2, b2, a2) in (0..27).map(|k| (k / 9, (k / 3) % 3, k % 3)) {
                        y += mix[0][(a, a2)] * mix[1][(b, b2)] * mix[2][(c, c2)] * at(a2, b2, c2);
                    }
                    data.push(y);
                }
            }
        }
    }
    TensorSeries::new(n, vec![3, 3, 3], data).unwrap()
}

#[test]
fn three_mode_groups_are_recovered() {
    let cfg = SegmentationConfig::default();
    let reps = 50;
    let mut correct = 0;
    for rep in 0..reps {
        let mut r = rng(1000 + rep);
        let mix = [(); 3].map(|_| Matrix::from_fn(3, 3, |_, _| r.random_range(-3.0..3.0)));
        let seq = sequential_segment(&three_mode_series(&mut r, 2000, &mix), &cfg).unwrap();
        let ok = seq.modes.iter().all(|mode| {
            let res = mode.outcome.as_ref().unwrap();
            let mut sizes: Vec<usize> = res.groups.iter().map(Vec::len).collect();
            sizes.sort_unstable();
            sizes == [1, 2]
        });
        correct += usize::from(ok);
    }
    assert!(correct * 5 >= reps as usize * 4, "{correct} of {reps} correct");
}
