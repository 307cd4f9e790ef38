use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::bias::{log_relative_bias, log_relative_bias_backward, BiasCache};
use super::mask::compute_attention_mask;
use super::window::{cyclic_shift, inverse_shift, window_merge, window_partition};
use crate::error::{ensure, Result};
use crate::math::{exp, ln, sigmoid, softplus, softplus_inv, sqrt};
use crate::params::{join, Parameters};
use crate::qnn::{QmlpParams, QuantumLayerParams};
use crate::qsim::{Executor, Pauli};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

/// Upper bound on the effective attention temperature.
pub const KAPPA_MAX: f64 = 100.0;
const KAPPA_INIT: f64 = 10.0;
const GAMMA_INIT: f64 = 8.0;
const NORM_EPS: f64 = 1e-12;

/// Attention score between a query and a key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// `κ_h · cos(q, k)`.
    #[default]
    Cosine,
    /// `q · k / √d_head`.
    ScaledDot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqwinParams {
    pub heads: usize,
    pub window: usize,
    pub scoring: Scoring,
    pub q: QuantumLayerParams,
    pub k: QuantumLayerParams,
    pub v: QuantumLayerParams,
    pub o: QuantumLayerParams,
    /// Per-head log temperature; the effective value is clamped at `ln 100`.
    pub kappa_raw: Vec<f64>,
    /// `[γ_x, γ_y]` before softplus.
    pub gamma_raw: Vec<f64>,
    pub bias_mlp: QmlpParams,
}

impl SqwinParams {
    /// Single-layer `dim`-qubit projections rotating about `basis`, measured in
    /// `Z`; the bias MLP maps 2 → `heads` through `2·qmlp_ratio` qubits.
    #[allow(clippy::too_many_arguments)]
    pub fn init(
        dim: usize,
        heads: usize,
        window: usize,
        qmlp_ratio: usize,
        bias_depth: usize,
        basis: Pauli,
        scoring: Scoring,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        ensure!(heads >= 1 && dim.is_multiple_of(heads), Validation, "{} heads do not divide width {}", heads, dim);
        ensure!(window >= 1, Validation, "window size must be positive");
        let mut proj = || QuantumLayerParams::init_with_bases(dim, 1, vec![basis], vec![Pauli::Z], rng);
        let (q, k, v, o) = (proj()?, proj()?, proj()?, proj()?);
        let bias_mlp = QmlpParams::init(2, 2 * qmlp_ratio, heads, bias_depth, rng)?;
        Ok(Self {
            heads,
            window,
            scoring,
            q,
            k,
            v,
            o,
            kappa_raw: vec![ln(KAPPA_INIT); heads],
            gamma_raw: vec![softplus_inv(GAMMA_INIT); 2],
            bias_mlp,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.n_qubits()
    }

    /// Effective temperature of head `h`.
    pub fn kappa(&self, h: usize) -> f64 {
        exp(self.kappa_raw[h].min(ln(KAPPA_MAX)))
    }

    /// `[γ_x, γ_y]`.
    pub fn gamma(&self) -> [f64; 2] {
        [softplus(self.gamma_raw[0]), softplus(self.gamma_raw[1])]
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        ensure!(self.heads >= 1 && d.is_multiple_of(self.heads), Validation, "{} heads do not divide width {}", self.heads, d);
        for (name, layer) in [("q", &self.q), ("k", &self.k), ("v", &self.v), ("o", &self.o)] {
            ensure!(
                layer.n_qubits() == d && layer.output_width() == d,
                Validation,
                "projection {} must map {} features to {}",
                name,
                d,
                d
            );
        }
        ensure!(self.kappa_raw.len() == self.heads, Validation, "expected {} temperatures", self.heads);
        ensure!(self.gamma_raw.len() == 2, Validation, "expected two bias scales");
        ensure!(self.bias_mlp.out_dim() == self.heads, Validation, "bias MLP must emit one value per head");
        Ok(())
    }

    pub fn forward(&self, x: &Tensor, shift: usize, exec: &Executor) -> Result<(Tensor, SqwinCache)> {
        self.validate()?;
        let (h, w, d) = x.dims3()?;
        ensure!(d == self.dim(), Validation, "feature width {} does not match attention width {}", d, self.dim());
        let m = self.window;
        let mask = compute_attention_mask(h, w, m, shift)?;
        let tokens = window_partition(&cyclic_shift(x, shift)?, m)?.into_data();
        let q = exec.forward(&self.q, &tokens)?;
        let k = exec.forward(&self.k, &tokens)?;
        let v = exec.forward(&self.v, &tokens)?;
        let [gx, gy] = self.gamma();
        let (bias, bias_cache) = log_relative_bias(m, gx, gy, &self.bias_mlp, exec)?;

        let t = m * m;
        let n_windows = tokens.len() / (t * d);
        let heads = self.heads;
        let dh = d / heads;
        let q_norm = head_norms(&q, dh);
        let k_norm = head_norms(&k, dh);
        let mut scores = vec![0.0; n_windows * heads * t * t];
        let mut attn = vec![0.0; scores.len()];
        let mut attended = vec![0.0; tokens.len()];
        let mut logits = vec![0.0; t];
        for win in 0..n_windows {
            for head in 0..heads {
                let kappa = self.kappa(head);
                let hs = head * dh..(head + 1) * dh;
                for i in 0..t {
                    let ti = win * t + i;
                    let qi = &q[ti * d + hs.start..ti * d + hs.end];
                    let base = ((win * heads + head) * t + i) * t;
                    for j in 0..t {
                        let tj = win * t + j;
                        let kj = &k[tj * d + hs.start..tj * d + hs.end];
                        let dot: f64 = qi.iter().zip(kj).map(|(a, b)| a * b).sum();
                        let (score, scale) = match self.scoring {
                            Scoring::Cosine => {
                                let (nq, nk) = (q_norm[ti * heads + head], k_norm[tj * heads + head]);
                                let c = if nq < NORM_EPS || nk < NORM_EPS { 0.0 } else { dot / (nq * nk) };
                                (c, kappa)
                            }
                            Scoring::ScaledDot => (dot / sqrt(dh as f64), 1.0),
                        };
                        scores[base + j] = score;
                        logits[j] =
                            scale * score + bias.data()[(head * t + i) * t + j] + mask.mask.data()[(win * t + i) * t + j];
                    }
                    softmax_into(&logits, &mut attn[base..base + t]);
                    let out = &mut attended[ti * d + hs.start..ti * d + hs.end];
                    for j in 0..t {
                        let a = attn[base + j];
                        let tj = win * t + j;
                        for (o, vv) in out.iter_mut().zip(&v[tj * d + hs.start..tj * d + hs.end]) {
                            *o += a * vv;
                        }
                    }
                }
            }
        }
        let projected = exec.forward(&self.o, &attended)?;
        let merged = window_merge(&Tensor::from_vec(&[n_windows, t, d], projected)?, m, h, w)?;
        let y = inverse_shift(&merged, shift)?;
        let cache = SqwinCache {
            dims: (h, w, d),
            shift,
            mask: mask.mask,
            tokens,
            q,
            k,
            v,
            q_norm,
            k_norm,
            scores,
            attn,
            attended,
            bias_cache,
        };
        Ok((y, cache))
    }

    /// Accumulates parameter gradients into `grad`; returns `∂L/∂x`.
    pub fn backward(&self, cache: &SqwinCache, dy: &Tensor, grad: &mut SqwinParams, exec: &Executor) -> Result<Tensor> {
        let (h, w, d) = cache.dims;
        ensure!(
            dy.shape() == [h, w, d],
            Validation,
            "output gradient shape {:?} does not match ({}, {}, {})",
            dy.shape(),
            h,
            w,
            d
        );
        let m = self.window;
        let t = m * m;
        let heads = self.heads;
        let dh = d / heads;
        let n_windows = cache.tokens.len() / (t * d);
        let d_proj = window_partition(&cyclic_shift(dy, cache.shift)?, m)?.into_data();
        let (d_att, d_theta_o) = exec.backward(&self.o, &cache.attended, &d_proj)?;
        add_into(&mut grad.o.theta, &d_theta_o);

        let (q, k, v) = (&cache.q, &cache.k, &cache.v);
        let mut dq = vec![0.0; q.len()];
        let mut dk = vec![0.0; k.len()];
        let mut dv = vec![0.0; v.len()];
        let mut d_bias = vec![0.0; heads * t * t];
        let mut da = vec![0.0; t];
        for win in 0..n_windows {
            for head in 0..heads {
                let kappa = self.kappa(head);
                let kappa_open = self.kappa_raw[head] < ln(KAPPA_MAX);
                let hs = head * dh..(head + 1) * dh;
                for i in 0..t {
                    let ti = win * t + i;
                    let base = ((win * heads + head) * t + i) * t;
                    let a = &cache.attn[base..base + t];
                    let g = &d_att[ti * d + hs.start..ti * d + hs.end];
                    let mut mean = 0.0;
                    for j in 0..t {
                        let tj = win * t + j;
                        let vj = &v[tj * d + hs.start..tj * d + hs.end];
                        da[j] = g.iter().zip(vj).map(|(x, y)| x * y).sum();
                        mean += a[j] * da[j];
                        for (acc, gg) in dv[tj * d + hs.start..tj * d + hs.end].iter_mut().zip(g) {
                            *acc += a[j] * gg;
                        }
                    }
                    for j in 0..t {
                        let dl = a[j] * (da[j] - mean);
                        let tj = win * t + j;
                        d_bias[(head * t + i) * t + j] += dl;
                        let score = cache.scores[base + j];
                        let qi = &q[ti * d + hs.start..ti * d + hs.end];
                        let kj = &k[tj * d + hs.start..tj * d + hs.end];
                        match self.scoring {
                            Scoring::Cosine => {
                                if kappa_open {
                                    grad.kappa_raw[head] += dl * score * kappa;
                                }
                                let (nq, nk) = (cache.q_norm[ti * heads + head], cache.k_norm[tj * heads + head]);
                                if nq < NORM_EPS || nk < NORM_EPS {
                                    continue;
                                }
                                let ds = dl * kappa;
                                let inv = 1.0 / (nq * nk);
                                for c in 0..dh {
                                    dq[ti * d + hs.start + c] += ds * (kj[c] * inv - score * qi[c] / (nq * nq));
                                    dk[tj * d + hs.start + c] += ds * (qi[c] * inv - score * kj[c] / (nk * nk));
                                }
                            }
                            Scoring::ScaledDot => {
                                let s = dl / sqrt(dh as f64);
                                for c in 0..dh {
                                    dq[ti * d + hs.start + c] += s * kj[c];
                                    dk[tj * d + hs.start + c] += s * qi[c];
                                }
                            }
                        }
                    }
                }
            }
        }

        let d_gamma = log_relative_bias_backward(&self.bias_mlp, &cache.bias_cache, &d_bias, &mut grad.bias_mlp, exec)?;
        for (idx, dg) in d_gamma.iter().enumerate() {
            grad.gamma_raw[idx] += dg * sigmoid(self.gamma_raw[idx]);
        }

        let mut d_tokens = vec![0.0; cache.tokens.len()];
        let (dx, d_theta) = exec.backward(&self.q, &cache.tokens, &dq)?;
        add_into(&mut d_tokens, &dx);
        add_into(&mut grad.q.theta, &d_theta);
        let (dx, d_theta) = exec.backward(&self.k, &cache.tokens, &dk)?;
        add_into(&mut d_tokens, &dx);
        add_into(&mut grad.k.theta, &d_theta);
        let (dx, d_theta) = exec.backward(&self.v, &cache.tokens, &dv)?;
        add_into(&mut d_tokens, &dx);
        add_into(&mut grad.v.theta, &d_theta);
        let merged = window_merge(&Tensor::from_vec(&[n_windows, t, d], d_tokens)?, m, h, w)?;
        inverse_shift(&merged, cache.shift)
    }
}

fn add_into(acc: &mut [f64], values: &[f64]) {
    for (a, v) in acc.iter_mut().zip(values) {
        *a += v;
    }
}

fn head_norms(x: &[f64], dh: usize) -> Vec<f64> {
    x.chunks_exact(dh).map(|c| sqrt(c.iter().map(|v| v * v).sum())).collect()
}

fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = exp(l - max);
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

impl Parameters for SqwinParams {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        self.q.for_each(&join(prefix, "q"), f);
        self.k.for_each(&join(prefix, "k"), f);
        self.v.for_each(&join(prefix, "v"), f);
        self.o.for_each(&join(prefix, "o"), f);
        f(&join(prefix, "kappa_raw"), &self.kappa_raw);
        f(&join(prefix, "gamma_raw"), &self.gamma_raw);
        self.bias_mlp.for_each(&join(prefix, "bias_mlp"), f);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.q.for_each_mut(&join(prefix, "q"), f);
        self.k.for_each_mut(&join(prefix, "k"), f);
        self.v.for_each_mut(&join(prefix, "v"), f);
        self.o.for_each_mut(&join(prefix, "o"), f);
        f(&join(prefix, "kappa_raw"), &mut self.kappa_raw);
        f(&join(prefix, "gamma_raw"), &mut self.gamma_raw);
        self.bias_mlp.for_each_mut(&join(prefix, "bias_mlp"), f);
    }
}

/// Activations from one attention pass.
#[derive(Debug, Clone)]
pub struct SqwinCache {
    dims: (usize, usize, usize),
    shift: usize,
    mask: Tensor,
    tokens: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    q_norm: Vec<f64>,
    k_norm: Vec<f64>,
    scores: Vec<f64>,
    attn: Vec<f64>,
    attended: Vec<f64>,
    bias_cache: BiasCache,
}

impl SqwinCache {
    /// Post-softmax weights, `[N_w, heads, M², M²]` flattened.
    pub fn attention(&self) -> &[f64] {
        &self.attn
    }

    /// Additive mask used for this pass, `[N_w, M², M²]`.
    pub fn mask(&self) -> &Tensor {
        &self.mask
    }

    /// Raw query/key scores before temperature, bias and mask.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

/// One attention pass on `[H, W, D]`.
pub fn sqwin_forward(x: &Tensor, p: &SqwinParams, shift: usize, exec: &Executor) -> Result<Tensor> {
    Ok(p.forward(x, shift, exec)?.0)
}
