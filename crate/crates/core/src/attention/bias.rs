use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::math::{log2, sign, LN_2};
use crate::qnn::{QmlpCache, QmlpParams};
use crate::qsim::Executor;
use crate::tensor::Tensor;

/// Row of the `(2M−1)²` displacement table for tokens `i`, `j` of an `M × M`
/// window (`Δ = pos_i − pos_j`, `Δy` major).
pub fn displacement_index(m: usize, i: usize, j: usize) -> usize {
    let span = 2 * m - 1;
    let dy = i / m + m - 1 - j / m;
    let dx = i % m + m - 1 - j % m;
    dy * span + dx
}

/// Log-spaced features for every displacement in the table, `(Δx, Δy)` per
/// row.
pub fn log_features(m: usize, gamma_x: f64, gamma_y: f64) -> Vec<f64> {
    let r = m as isize - 1;
    let mut out = Vec::with_capacity(2 * (2 * m - 1) * (2 * m - 1));
    for dy in -r..=r {
        for dx in -r..=r {
            out.push(log_coord(dx as f64, gamma_x));
            out.push(log_coord(dy as f64, gamma_y));
        }
    }
    out
}

fn log_coord(d: f64, gamma: f64) -> f64 {
    sign(d) * log2(1.0 + d.abs() / gamma)
}

fn log_coord_dgamma(d: f64, gamma: f64) -> f64 {
    let a = d.abs();
    -sign(d) * a / (gamma * gamma * (1.0 + a / gamma) * LN_2)
}

/// Activations kept to differentiate the bias table.
#[derive(Debug, Clone)]
pub struct BiasCache {
    pub window: usize,
    pub gamma: [f64; 2],
    pub features: Vec<f64>,
    pub table: Vec<f64>,
    mlp: QmlpCache,
}

/// Per-head relative position bias `[heads, M², M²]`.
pub fn log_relative_bias(
    m: usize,
    gamma_x: f64,
    gamma_y: f64,
    bias_mlp: &QmlpParams,
    exec: &Executor,
) -> Result<(Tensor, BiasCache)> {
    ensure!(m >= 1, Validation, "window size must be positive");
    ensure!(
        gamma_x > 0.0 && gamma_y > 0.0 && gamma_x.is_finite() && gamma_y.is_finite(),
        Validation,
        "bias scales must be positive, got ({}, {})",
        gamma_x,
        gamma_y
    );
    ensure!(bias_mlp.in_dim() == 2, Validation, "bias MLP must take 2 inputs, takes {}", bias_mlp.in_dim());
    let heads = bias_mlp.out_dim();
    let features = log_features(m, gamma_x, gamma_y);
    let (table, mlp) = bias_mlp.forward_rows(&features, exec)?;
    let t = m * m;
    let mut bias = vec![0.0; heads * t * t];
    for i in 0..t {
        for j in 0..t {
            let row = displacement_index(m, i, j) * heads;
            for h in 0..heads {
                bias[(h * t + i) * t + j] = table[row + h];
            }
        }
    }
    let cache = BiasCache { window: m, gamma: [gamma_x, gamma_y], features, table, mlp };
    Ok((Tensor::from_vec(&[heads, t, t], bias)?, cache))
}

/// Back-propagates `d_bias` (`[heads, M², M²]`) into `grad` and returns
/// `(∂/∂γ_x, ∂/∂γ_y)`.
pub(crate) fn log_relative_bias_backward(
    bias_mlp: &QmlpParams,
    cache: &BiasCache,
    d_bias: &[f64],
    grad: &mut QmlpParams,
    exec: &Executor,
) -> Result<[f64; 2]> {
    let m = cache.window;
    let heads = bias_mlp.out_dim();
    let t = m * m;
    let mut d_table = vec![0.0; cache.table.len()];
    for h in 0..heads {
        for i in 0..t {
            for j in 0..t {
                d_table[displacement_index(m, i, j) * heads + h] += d_bias[(h * t + i) * t + j];
            }
        }
    }
    let d_features = bias_mlp.backward_rows(&cache.features, &cache.mlp, &d_table, grad, exec)?;
    let r = m as isize - 1;
    let mut d_gamma = [0.0; 2];
    let mut k = 0;
    for dy in -r..=r {
        for dx in -r..=r {
            d_gamma[0] += d_features[k] * log_coord_dgamma(dx as f64, cache.gamma[0]);
            d_gamma[1] += d_features[k + 1] * log_coord_dgamma(dy as f64, cache.gamma[1]);
            k += 2;
        }
    }
    Ok(d_gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn window_two_uses_nine_displacements() {
        let mut seen = [false; 9];
        for i in 0..4 {
            for j in 0..4 {
                seen[displacement_index(2, i, j)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(log_features(2, 8.0, 8.0).len(), 18);
    }

    #[test]
    fn diagonal_pairs_share_bias() {
        let mut r = rng::seeded(3);
        let mlp = QmlpParams::init(2, 4, 2, 1, &mut r).unwrap();
        let (b, _) = log_relative_bias(3, 8.0, 8.0, &mlp, &Executor::default()).unwrap();
        let t = 9;
        for h in 0..2 {
            let d0 = b.data()[h * t * t];
            for i in 0..t {
                assert_eq!(b.data()[(h * t + i) * t + i], d0);
            }
        }
    }

    #[test]
    fn zero_post_weights_give_constant_bias() {
        let mut r = rng::seeded(4);
        let mut mlp = QmlpParams::init(2, 4, 2, 1, &mut r).unwrap();
        mlp.post.weight.fill(0.0);
        mlp.post.bias = vec![0.25, -0.5];
        let (b, _) = log_relative_bias(2, 8.0, 8.0, &mlp, &Executor::default()).unwrap();
        assert!(b.data()[..16].iter().all(|&v| v == 0.25));
        assert!(b.data()[16..].iter().all(|&v| v == -0.5));
    }

    #[test]
    fn non_positive_gamma_is_rejected() {
        let mut r = rng::seeded(5);
        let mlp = QmlpParams::init(2, 4, 2, 1, &mut r).unwrap();
        assert!(log_relative_bias(2, 0.0, 8.0, &mlp, &Executor::default()).is_err());
    }

    #[test]
    fn gamma_derivative_matches_difference() {
        for d in [-3.0, -1.0, 0.0, 2.0] {
            let g = 5.0;
            let h = 1e-6;
            let fd = (log_coord(d, g + h) - log_coord(d, g - h)) / (2.0 * h);
            assert!((fd - log_coord_dgamma(d, g)).abs() < 1e-8);
        }
    }
}
