use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::math::sqrt;
use crate::params::{join, Parameters};
use crate::tensor::Tensor;

pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Per-token normalization over the trailing (channel) axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerNorm {
    pub scale: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LayerNormCache {
    normalized: Vec<f64>,
    inv_std: Vec<f64>,
}

impl LayerNorm {
    pub fn new(dim: usize) -> Self {
        Self { scale: vec![1.0; dim], bias: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, LayerNormCache)> {
        let d = self.dim();
        ensure!(d >= 1, Validation, "layer norm needs at least one channel");
        ensure!(
            x.shape().last() == Some(&d),
            Validation,
            "layer norm over {} channels got shape {:?}",
            d,
            x.shape()
        );
        let mut y = x.clone();
        let mut normalized = vec![0.0; x.len()];
        let mut inv_std = Vec::with_capacity(x.len() / d);
        for (row, (out, nrm)) in x.data().chunks_exact(d).zip(y.data_mut().chunks_exact_mut(d).zip(normalized.chunks_exact_mut(d))) {
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let s = 1.0 / sqrt(var + LAYER_NORM_EPS);
            inv_std.push(s);
            for i in 0..d {
                nrm[i] = (row[i] - mean) * s;
                out[i] = nrm[i] * self.scale[i] + self.bias[i];
            }
        }
        Ok((y, LayerNormCache { normalized, inv_std }))
    }

    /// Accumulates into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, cache: &LayerNormCache, dy: &Tensor, grad: &mut LayerNorm) -> Tensor {
        let d = self.dim();
        let mut dx = dy.clone();
        let mut dn = vec![0.0; d];
        for ((g, xn), (out, &s)) in dy
            .data()
            .chunks_exact(d)
            .zip(cache.normalized.chunks_exact(d))
            .zip(dx.data_mut().chunks_exact_mut(d).zip(&cache.inv_std))
        {
            for i in 0..d {
                grad.scale[i] += g[i] * xn[i];
                grad.bias[i] += g[i];
                dn[i] = g[i] * self.scale[i];
            }
            let mean_dn = dn.iter().sum::<f64>() / d as f64;
            let mean_dn_xn = dn.iter().zip(xn).map(|(a, b)| a * b).sum::<f64>() / d as f64;
            for i in 0..d {
                out[i] = s * (dn[i] - mean_dn - xn[i] * mean_dn_xn);
            }
        }
        dx
    }
}

impl Parameters for LayerNorm {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        f(&join(prefix, "scale"), &self.scale);
        f(&join(prefix, "bias"), &self.bias);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&join(prefix, "scale"), &mut self.scale);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}

/// Functional form of [`LayerNorm::forward`].
pub fn layer_norm(x: &Tensor, norm: &LayerNorm) -> Result<Tensor> {
    Ok(norm.forward(x)?.0)
}
