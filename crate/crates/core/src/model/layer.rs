use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::conv::Conv2d;
use super::norm::{LayerNorm, LayerNormCache};
use crate::attention::{SqwinCache, SqwinParams};
use crate::error::Result;
use crate::params::{join, Parameters};
use crate::qnn::{QmlpCache, QmlpParams};
use crate::qsim::Executor;
use crate::rng::{self, SeededRng};
use crate::tensor::Tensor;

/// Whether stochastic depth is active.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Eval,
    /// Residual branches are dropped with draws derived from `seed`.
    Train { seed: u64 },
}

/// Residual-branch multiplier for DropPath: `0` when dropped, `1/(1-rate)`
/// when kept, `1` outside training.
pub fn drop_path_scale(rate: f64, mode: Mode, layer: usize, branch: usize) -> f64 {
    match mode {
        Mode::Eval => 1.0,
        Mode::Train { .. } if rate <= 0.0 => 1.0,
        Mode::Train { .. } if rate >= 1.0 => 0.0,
        Mode::Train { seed } => {
            let stream = ((2 * layer + branch) as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut r: SeededRng = rng::derived(seed, stream);
            if rng::uniform(&mut r, 0.0, 1.0) < rate {
                0.0
            } else {
                1.0 / (1.0 - rate)
            }
        }
    }
}

/// `x + DropPath(SQWIN(LN(x)))` followed by `x + DropPath(QMLP(LN(x)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerLayer {
    pub norm1: LayerNorm,
    pub attn: SqwinParams,
    pub norm2: LayerNorm,
    pub mlp: QmlpParams,
}

#[derive(Debug, Clone)]
pub struct LayerCache {
    scales: [f64; 2],
    attn: Option<(LayerNormCache, SqwinCache)>,
    mlp: Option<(LayerNormCache, Tensor, QmlpCache)>,
}

impl TransformerLayer {
    pub fn forward(&self, x: &Tensor, shift: usize, scales: [f64; 2], exec: &Executor) -> Result<(Tensor, LayerCache)> {
        let mut x1 = x.clone();
        let attn = if scales[0] != 0.0 {
            let (a_in, n1) = self.norm1.forward(x)?;
            let (a, cache) = self.attn.forward(&a_in, shift, exec)?;
            axpy(&mut x1, scales[0], &a);
            Some((n1, cache))
        } else {
            None
        };
        let mut y = x1.clone();
        let mlp = if scales[1] != 0.0 {
            let (m_in, n2) = self.norm2.forward(&x1)?;
            let (m, cache) = self.mlp.forward_rows(m_in.data(), exec)?;
            axpy(&mut y, scales[1], &Tensor::from_vec(x.shape(), m)?);
            Some((n2, m_in, cache))
        } else {
            None
        };
        Ok((y, LayerCache { scales, attn, mlp }))
    }

    /// Accumulates into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, cache: &LayerCache, dy: &Tensor, grad: &mut TransformerLayer, exec: &Executor) -> Result<Tensor> {
        let mut dx1 = dy.clone();
        if let Some((n2, m_in, mc)) = &cache.mlp {
            let dm: Vec<f64> = dy.data().iter().map(|g| g * cache.scales[1]).collect();
            let dm_in = self.mlp.backward_rows(m_in.data(), mc, &dm, &mut grad.mlp, exec)?;
            dx1.add_assign(&self.norm2.backward(n2, &Tensor::from_vec(dy.shape(), dm_in)?, &mut grad.norm2));
        }
        let mut dx = dx1.clone();
        if let Some((n1, ac)) = &cache.attn {
            let da = dx1.map(|g| g * cache.scales[0]);
            let da_in = self.attn.backward(ac, &da, &mut grad.attn, exec)?;
            dx.add_assign(&self.norm1.backward(n1, &da_in, &mut grad.norm1));
        }
        Ok(dx)
    }
}

fn axpy(acc: &mut Tensor, a: f64, x: &Tensor) {
    for (y, v) in acc.data_mut().iter_mut().zip(x.data()) {
        *y += a * v;
    }
}

impl Parameters for TransformerLayer {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        self.norm1.for_each(&join(prefix, "norm1"), f);
        self.attn.for_each(&join(prefix, "attn"), f);
        self.norm2.for_each(&join(prefix, "norm2"), f);
        self.mlp.for_each(&join(prefix, "mlp"), f);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.norm1.for_each_mut(&join(prefix, "norm1"), f);
        self.attn.for_each_mut(&join(prefix, "attn"), f);
        self.norm2.for_each_mut(&join(prefix, "norm2"), f);
        self.mlp.for_each_mut(&join(prefix, "mlp"), f);
    }
}

/// Residual group of transformer layers closed by a 3×3 convolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub layers: Vec<TransformerLayer>,
    pub conv: Conv2d,
}

impl Parameters for BlockParams {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        for (i, layer) in self.layers.iter().enumerate() {
            layer.for_each(&join(prefix, &alloc::format!("layers.{i}")), f);
        }
        self.conv.for_each(&join(prefix, "conv"), f);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        for (i, layer) in self.layers.iter_mut().enumerate() {
            layer.for_each_mut(&join(prefix, &alloc::format!("layers.{i}")), f);
        }
        self.conv.for_each_mut(&join(prefix, "conv"), f);
    }
}
