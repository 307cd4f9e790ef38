//! The super-resolution network: shallow convolution, residual groups of
//! shifted-window quantum transformer layers, a global residual, and
//! sub-pixel upsampling.

mod conv;
mod layer;
mod norm;
mod shuffle;

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub use conv::{conv2d_3x3, Conv2d};
pub use layer::{drop_path_scale, BlockParams, LayerCache, Mode, TransformerLayer};
pub use norm::{layer_norm, LayerNorm, LayerNormCache, LAYER_NORM_EPS};
pub use shuffle::{pixel_shuffle, pixel_unshuffle};

use crate::attention::{Scoring, SqwinParams};
use crate::error::{bail, ensure, Error, Result};
use crate::math::{ceil, log2};
use crate::params::{join, Parameters};
use crate::qnn::{QmlpParams, QMLP_MAX_QUBITS};
use crate::qsim::{Executor, Pauli, MAX_QUBITS};
use crate::rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub window: usize,
    pub num_layers: usize,
    pub heads: usize,
    pub qmlp_ratio: usize,
    pub upscale: usize,
    pub layers_per_block: usize,
    pub drop_path: f64,
    pub qlayer_depth: usize,
    pub channels: usize,
    /// Rotation axis of single-layer circuits (attention projections and
    /// depth-1 QMLPs).
    pub rotation_basis: Pauli,
    pub scoring: Scoring,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embed_dim: 4,
            window: 2,
            num_layers: 6,
            heads: 2,
            qmlp_ratio: 2,
            upscale: 2,
            layers_per_block: 2,
            drop_path: 0.0,
            qlayer_depth: 1,
            channels: 1,
            rotation_basis: Pauli::Z,
            scoring: Scoring::Cosine,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.embed_dim;
        ensure!((1..=MAX_QUBITS).contains(&d), Capacity, "embedding width {} outside 1..={}", d, MAX_QUBITS);
        ensure!(self.window >= 1, Validation, "window must be positive");
        ensure!(self.upscale >= 1, Validation, "upscale factor must be positive");
        ensure!(self.channels >= 1, Validation, "at least one image channel is required");
        ensure!(self.heads >= 1 && d.is_multiple_of(self.heads), Validation, "{} heads do not divide width {}", self.heads, d);
        ensure!(self.qmlp_ratio >= 1, Validation, "QMLP ratio must be positive");
        ensure!(self.qlayer_depth >= 1, Validation, "circuit depth must be positive");
        ensure!(
            self.layers_per_block >= 1 && self.num_layers.is_multiple_of(self.layers_per_block),
            Validation,
            "{} layers cannot be grouped by {}",
            self.num_layers,
            self.layers_per_block
        );
        ensure!((0.0..=1.0).contains(&self.drop_path), Validation, "drop path rate {} outside [0, 1]", self.drop_path);
        let hidden = d * self.qmlp_ratio;
        ensure!(
            hidden <= QMLP_MAX_QUBITS && 2 * self.qmlp_ratio <= QMLP_MAX_QUBITS,
            Capacity,
            "QMLP hidden width {} exceeds the {}-qubit budget",
            hidden,
            QMLP_MAX_QUBITS
        );
        Ok(())
    }

    pub fn num_blocks(&self) -> usize {
        self.num_layers / self.layers_per_block
    }

    /// Window shift of global layer `l`: none on even layers, half a window on
    /// odd ones.
    pub fn shift_for_layer(&self, l: usize) -> usize {
        if l.is_multiple_of(2) {
            0
        } else {
            self.window / 2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub conv_in: Conv2d,
    pub blocks: Vec<BlockParams>,
    pub conv_mid: Conv2d,
    pub conv_up: Conv2d,
    pub conv_out: Conv2d,
}

/// Activations retained for [`ModelParams::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Tensor,
    layers: Vec<Vec<LayerCache>>,
    block_conv_inputs: Vec<Tensor>,
    features: Tensor,
    fused: Tensor,
    shuffled: Tensor,
}

impl ModelParams {
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng::seeded(seed);
        let (c, d, s) = (config.channels, config.embed_dim, config.upscale);
        let conv_in = Conv2d::init(c, d, &mut r);
        let mut blocks = Vec::with_capacity(config.num_blocks());
        for _ in 0..config.num_blocks() {
            let mut layers = Vec::with_capacity(config.layers_per_block);
            for _ in 0..config.layers_per_block {
                let attn = SqwinParams::init(
                    d,
                    config.heads,
                    config.window,
                    config.qmlp_ratio,
                    config.qlayer_depth,
                    config.rotation_basis,
                    config.scoring,
                    &mut r,
                )?;
                let mlp = QmlpParams::init_with_basis(
                    d,
                    d * config.qmlp_ratio,
                    d,
                    config.qlayer_depth,
                    config.rotation_basis,
                    &mut r,
                )?;
                layers.push(TransformerLayer { norm1: LayerNorm::new(d), attn, norm2: LayerNorm::new(d), mlp });
            }
            blocks.push(BlockParams { layers, conv: Conv2d::init(d, d, &mut r) });
        }
        let conv_mid = Conv2d::init(d, d, &mut r);
        let conv_up = Conv2d::init(d, c * s * s, &mut r);
        let conv_out = Conv2d::init(c, c, &mut r);
        Ok(Self { config: config.clone(), conv_in, blocks, conv_mid, conv_up, conv_out })
    }

    /// Shift applied by every transformer layer, in execution order.
    pub fn shift_schedule(&self) -> Vec<usize> {
        (0..self.config.num_layers).map(|l| self.config.shift_for_layer(l)).collect()
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        let (h, w, c) = x.dims3()?;
        let m = self.config.window;
        ensure!(c == self.config.channels, Validation, "model expects {} channels, got {}", self.config.channels, c);
        ensure!(h % m == 0 && w % m == 0, Validation, "{}×{} input is not divisible by window {}", h, w, m);
        ensure!(x.is_finite(), Validation, "input contains non-finite values");
        Ok(())
    }

    pub fn forward(&self, x: &Tensor, exec: &Executor) -> Result<Tensor> {
        Ok(self.forward_cached(x, Mode::Eval, exec)?.0)
    }

    /// Output of the last residual group, before the global residual and
    /// upsampling.
    pub fn features(&self, x: &Tensor, exec: &Executor) -> Result<Tensor> {
        Ok(self.forward_cached(x, Mode::Eval, exec)?.1.features)
    }

    pub fn forward_cached(&self, x: &Tensor, mode: Mode, exec: &Executor) -> Result<(Tensor, ForwardCache)> {
        self.check_input(x)?;
        let cfg = &self.config;
        let f0 = self.conv_in.forward(x)?;
        let mut f = f0.clone();
        let mut layers = Vec::with_capacity(self.blocks.len());
        let mut block_conv_inputs = Vec::with_capacity(self.blocks.len());
        let mut l = 0;
        for block in &self.blocks {
            let block_in = f.clone();
            let mut caches = Vec::with_capacity(block.layers.len());
            for layer in &block.layers {
                let scales = [0, 1].map(|b| drop_path_scale(cfg.drop_path, mode, l, b));
                let (y, cache) = layer.forward(&f, cfg.shift_for_layer(l), scales, exec)?;
                finite(&y, || format!("layer {l}"))?;
                f = y;
                caches.push(cache);
                l += 1;
            }
            let mut out = block.conv.forward(&f)?;
            out.add_assign(&block_in);
            block_conv_inputs.push(core::mem::replace(&mut f, out));
            layers.push(caches);
        }
        let mut fused = self.conv_mid.forward(&f)?;
        fused.add_assign(&f0);
        let shuffled = pixel_shuffle(&self.conv_up.forward(&fused)?, cfg.upscale)?;
        let y = self.conv_out.forward(&shuffled)?;
        finite(&y, || "output".into())?;
        let cache = ForwardCache { input: x.clone(), layers, block_conv_inputs, features: f, fused, shuffled };
        Ok((y, cache))
    }

    /// Accumulates parameter gradients into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, cache: &ForwardCache, dy: &Tensor, grad: &mut ModelParams, exec: &Executor) -> Result<Tensor> {
        let d_shuffled = self.conv_out.backward(&cache.shuffled, dy, &mut grad.conv_out)?;
        let d_up = pixel_unshuffle(&d_shuffled, self.config.upscale)?;
        let d_fused = self.conv_up.backward(&cache.fused, &d_up, &mut grad.conv_up)?;
        let mut df = self.conv_mid.backward(&cache.features, &d_fused, &mut grad.conv_mid)?;
        let mut d_f0 = d_fused;
        for (b, block) in self.blocks.iter().enumerate().rev() {
            let mut g = block.conv.backward(&cache.block_conv_inputs[b], &df, &mut grad.blocks[b].conv)?;
            for (j, layer) in block.layers.iter().enumerate().rev() {
                g = layer.backward(&cache.layers[b][j], &g, &mut grad.blocks[b].layers[j], exec)?;
            }
            df.add_assign(&g);
        }
        d_f0.add_assign(&df);
        self.conv_in.backward(&cache.input, &d_f0, &mut grad.conv_in)
    }
}

fn finite(t: &Tensor, location: impl FnOnce() -> alloc::string::String) -> Result<()> {
    if t.is_finite() {
        return Ok(());
    }
    Err(Error::Numerical { location: location(), detail: "non-finite activation".into() })
}

impl Parameters for ModelParams {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        self.conv_in.for_each(&join(prefix, "conv_in"), f);
        for (i, b) in self.blocks.iter().enumerate() {
            b.for_each(&join(prefix, &format!("blocks.{i}")), f);
        }
        self.conv_mid.for_each(&join(prefix, "conv_mid"), f);
        self.conv_up.for_each(&join(prefix, "conv_up"), f);
        self.conv_out.for_each(&join(prefix, "conv_out"), f);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.conv_in.for_each_mut(&join(prefix, "conv_in"), f);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            b.for_each_mut(&join(prefix, &format!("blocks.{i}")), f);
        }
        self.conv_mid.for_each_mut(&join(prefix, "conv_mid"), f);
        self.conv_up.for_each_mut(&join(prefix, "conv_up"), f);
        self.conv_out.for_each_mut(&join(prefix, "conv_out"), f);
    }
}

/// Functional form of [`ModelParams::forward`]; `config` must match the one
/// the parameters were built with.
pub fn forward(x: &Tensor, params: &ModelParams, config: &ModelConfig, exec: &Executor) -> Result<Tensor> {
    if *config != params.config {
        bail!(Validation, "configuration does not match the parameters");
    }
    params.forward(x, exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    /// Widest circuit the model executes.
    pub qubits_per_circuit: usize,
    /// Circuit executions in one forward pass over an `H × W` input.
    pub circuits_per_forward: usize,
    pub param_count: usize,
    /// `⌈log₂ D⌉` with no ancillas.
    pub paper_formula_qubits: usize,
}

pub fn resource_report(config: &ModelConfig, h: usize, w: usize) -> Result<ResourceReport> {
    config.validate()?;
    let d = config.embed_dim;
    let m = config.window;
    let span = 2 * m - 1;
    let per_layer = 4 * h * w + h * w + span * span;
    Ok(ResourceReport {
        qubits_per_circuit: d.max(d * config.qmlp_ratio).max(2 * config.qmlp_ratio),
        circuits_per_forward: config.num_layers * per_layer,
        param_count: ModelParams::init(config, 0)?.param_count(),
        paper_formula_qubits: ceil(log2(d as f64)) as usize,
    })
}
