use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::math::{exp, sqrt};
use crate::rng;
use crate::tensor::Tensor;

fn rows(x: &Tensor) -> Result<(usize, usize)> {
    ensure!(x.shape().len() == 2, Validation, "expected an [n, d] matrix, got {:?}", x.shape());
    Ok((x.shape()[0], x.shape()[1]))
}

fn pairwise_distances(x: &Tensor) -> Vec<f64> {
    let (n, d) = (x.shape()[0], x.shape()[1]);
    let data = x.data();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = (0..d).map(|k| { let t = data[i * d + k] - data[j * d + k]; t * t }).sum();
            out[i * n + j] = sqrt(s);
            out[j * n + i] = out[i * n + j];
        }
    }
    out
}

fn double_center(m: &mut [f64], n: usize) {
    let row: Vec<f64> = (0..n).map(|i| m[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let grand = row.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] += grand - row[i] - row[j];
        }
    }
}

/// Sample distance correlation of paired rows, in `[0, 1]`; `0` when either
/// sample is constant.
pub fn distance_correlation(x: &Tensor, y: &Tensor) -> Result<f64> {
    let (n, _) = rows(x)?;
    let (ny, _) = rows(y)?;
    ensure!(n == ny, Validation, "samples have {} and {} rows", n, ny);
    ensure!(n >= 4, Validation, "distance correlation needs at least 4 rows, got {}", n);
    let mut a = pairwise_distances(x);
    let mut b = pairwise_distances(y);
    double_center(&mut a, n);
    double_center(&mut b, n);
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| u * v).sum::<f64>();
    let (xy, xx, yy) = (dot(&a, &b), dot(&a, &a), dot(&b, &b));
    let denom = sqrt(xx * yy);
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok(sqrt((xy / denom).max(0.0)).min(1.0))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn rbf_gram(x: &Tensor) -> Result<Vec<f64>> {
    let n = x.shape()[0];
    let dist = pairwise_distances(x);
    let upper: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| dist[i * n + j]).collect();
    let sigma = median(upper);
    ensure!(sigma > 0.0, Validation, "median pairwise distance is zero");
    Ok(dist.iter().map(|d| exp(-d * d / (2.0 * sigma * sigma))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsicResult {
    pub stat: f64,
    pub p_value: f64,
    pub permutations: usize,
}

/// Biased HSIC with median-bandwidth RBF kernels and a permutation test.
/// The p-value is `(1 + #{permuted ≥ observed}) / (1 + permutations)`.
pub fn hsic_test(x: &Tensor, y: &Tensor, permutations: usize, seed: u64) -> Result<HsicResult> {
    let (n, _) = rows(x)?;
    let (ny, _) = rows(y)?;
    ensure!(n == ny, Validation, "samples have {} and {} rows", n, ny);
    ensure!(n >= 10, Validation, "HSIC needs at least 10 rows, got {}", n);
    let mut k = rbf_gram(x)?;
    let l = rbf_gram(y)?;
    double_center(&mut k, n);
    let nn = (n * n) as f64;
    let stat_for = |perm: &[usize]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let li = perm[i] * n;
            for j in 0..n {
                s += k[i * n + j] * l[li + perm[j]];
            }
        }
        s / nn
    };
    let identity: Vec<usize> = (0..n).collect();
    let stat = stat_for(&identity);
    let mut r = rng::seeded(seed);
    let mut exceed = 0usize;
    for _ in 0..permutations {
        let perm = rng::permutation(&mut r, n);
        if stat_for(&perm) >= stat {
            exceed += 1;
        }
    }
    Ok(HsicResult { stat, p_value: (1 + exceed) as f64 / (1 + permutations) as f64, permutations })
}
