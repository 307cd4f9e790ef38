use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::dependence::{distance_correlation, hsic_test};
use crate::error::{ensure, Result};
use crate::rng;
use crate::tensor::Tensor;

/// Neighbourhood sizes swept by [`feature_analysis`].
pub const K_GRID: [usize; 5] = [10, 25, 50, 100, 150];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAnalysisReport {
    pub dcor_by_k: Vec<(usize, f64)>,
    /// Neighbourhood size used for the HSIC test (the largest in the sweep).
    pub hsic_k: usize,
    pub hsic_stat: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub samples: usize,
}

/// For every position of a `[H, W, D]` map, the mean feature of its `k`
/// spatially nearest other positions (ties broken in raster order).
pub fn neighbourhood_means(map: &Tensor, k: usize) -> Result<Tensor> {
    let (h, w, d) = map.dims3()?;
    let n = h * w;
    ensure!(k >= 1 && k < n, Validation, "neighbourhood size {} must be in 1..{}", k, n);
    let mut out = vec![0.0; n * d];
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(n);
    for p in 0..n {
        let (pr, pc) = ((p / w) as isize, (p % w) as isize);
        order.clear();
        order.extend((0..n).filter(|&q| q != p).map(|q| {
            let (dr, dc) = ((q / w) as isize - pr, (q % w) as isize - pc);
            ((dr * dr + dc * dc) as usize, q)
        }));
        order.sort_unstable();
        for &(_, q) in &order[..k] {
            for c in 0..d {
                out[p * d + c] += map.data()[q * d + c] / k as f64;
            }
        }
    }
    Tensor::from_vec(&[n, d], out)
}

/// Distance correlation between each position's feature and the mean of its
/// `k` nearest spatial neighbours, pooled over `maps`, for every `k` in
/// `ks`; plus an HSIC permutation test at the largest `k`. At most
/// `max_samples` positions (a seeded subset) enter the statistics.
pub fn feature_analysis(
    maps: &[Tensor],
    ks: &[usize],
    permutations: usize,
    seed: u64,
    max_samples: usize,
) -> Result<FeatureAnalysisReport> {
    ensure!(!maps.is_empty() && !ks.is_empty(), Validation, "feature analysis needs maps and neighbourhood sizes");
    let d = maps[0].dims3()?.2;
    let positions: usize = maps.iter().map(|m| m.shape().iter().take(2).product::<usize>()).sum();
    let mut r = rng::seeded(seed);
    let mut keep = rng::permutation(&mut r, positions);
    keep.truncate(max_samples.min(positions));
    keep.sort_unstable();
    let gather = |source: &[Tensor]| -> Tensor {
        let flat: Vec<f64> = source.iter().flat_map(|t| t.data().iter().copied()).collect();
        let data = keep.iter().flat_map(|&i| flat[i * d..(i + 1) * d].iter().copied()).collect();
        Tensor::from_vec(&[keep.len(), d], data).expect("gathered rows match width")
    };
    let x = gather(maps);
    let mut dcor_by_k = Vec::with_capacity(ks.len());
    let mut largest = None;
    let hsic_k = *ks.iter().max().expect("non-empty");
    for &k in ks {
        let means = maps.iter().map(|m| neighbourhood_means(m, k)).collect::<Result<Vec<_>>>()?;
        let y = gather(&means);
        dcor_by_k.push((k, distance_correlation(&x, &y)?));
        if k == hsic_k {
            largest = Some(y);
        }
    }
    let hsic = hsic_test(&x, &largest.expect("largest k visited"), permutations, seed)?;
    Ok(FeatureAnalysisReport {
        dcor_by_k,
        hsic_k,
        hsic_stat: hsic.stat,
        p_value: hsic.p_value,
        permutations,
        samples: keep.len(),
    })
}
