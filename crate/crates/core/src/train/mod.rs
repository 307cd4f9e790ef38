//! L1 objective, Adam, the epoch loop, and a finite-difference gradient
//! check for the full network.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dataio::{batches, DatasetHandle, ImagePair};
use crate::error::{ensure, Error, Result};
use crate::math::{sign, sqrt};
use crate::model::{Mode, ModelParams};
use crate::params::{locate, Parameters};
use crate::qsim::Executor;
use crate::rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub betas: (f64, f64),
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Run a gradient check on the first training sample every this many
    /// epochs.
    pub grad_check_every: Option<usize>,
    /// Rescale the batch gradient to at most this norm.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 2e-4,
            betas: (0.9, 0.999),
            eps: 1e-8,
            batch_size: 64,
            epochs: 25,
            seed: 0,
            grad_check_every: None,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.lr >= 0.0 && self.lr.is_finite(), Validation, "learning rate {} must be finite and non-negative", self.lr);
        ensure!(self.batch_size >= 1, Validation, "batch size must be positive");
        ensure!(
            (0.0..1.0).contains(&self.betas.0) && (0.0..1.0).contains(&self.betas.1),
            Validation,
            "Adam betas {:?} outside [0, 1)",
            self.betas
        );
        ensure!(self.eps > 0.0, Validation, "Adam epsilon must be positive");
        if let Some(c) = self.clip_norm {
            ensure!(c > 0.0, Validation, "clip norm must be positive");
        }
        Ok(())
    }
}

/// Mean absolute error and its cotangent `sign(sr − hr)/N`.
pub fn l1_loss(sr: &Tensor, hr: &Tensor) -> Result<(f64, Tensor)> {
    ensure!(sr.shape() == hr.shape(), Validation, "shapes {:?} and {:?} differ", sr.shape(), hr.shape());
    ensure!(!sr.is_empty(), Validation, "loss of an empty tensor");
    let n = sr.len() as f64;
    let mut total = 0.0;
    let mut grad = sr.zeros_like();
    for ((g, a), b) in grad.data_mut().iter_mut().zip(sr.data()).zip(hr.data()) {
        let d = a - b;
        total += d.abs();
        *g = sign(d) / n;
    }
    Ok((total / n, grad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}

/// Bias-corrected Adam update. Non-finite gradients leave everything
/// untouched.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &TrainConfig) -> Result<()> {
    ensure!(
        params.len() == grads.len() && params.len() == state.m.len() && params.len() == state.v.len(),
        Validation,
        "optimizer sizes differ: {} params, {} grads, {} moments",
        params.len(),
        grads.len(),
        state.m.len()
    );
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical { location: format!("gradient {i}"), detail: "non-finite gradient, step refused".into() });
    }
    let (b1, b2) = cfg.betas;
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - powi(b1, t);
    let c2 = 1.0 - powi(b2, t);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        *p -= cfg.lr * (*m / c1) / (sqrt(*v / c2) + cfg.eps);
    }
    Ok(())
}

fn powi(x: f64, n: i32) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

/// Mean loss over `pairs` and the gradient of that mean.
pub fn batch_gradient(
    model: &ModelParams,
    pairs: &[&ImagePair],
    mode: Mode,
    exec: &Executor,
) -> Result<(f64, ModelParams)> {
    ensure!(!pairs.is_empty(), Validation, "empty batch");
    let mut grad = model.zeros_like();
    let mut loss = 0.0;
    let scale = 1.0 / pairs.len() as f64;
    for (i, pair) in pairs.iter().enumerate() {
        let sample_mode = match mode {
            Mode::Eval => Mode::Eval,
            Mode::Train { seed } => Mode::Train { seed: seed ^ (i as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93) },
        };
        let (sr, cache) = model.forward_cached(&pair.lr, sample_mode, exec)?;
        let (l, dy) = l1_loss(&sr, &pair.hr)?;
        loss += l * scale;
        model.backward(&cache, &dy.map(|g| g * scale), &mut grad, exec)?;
    }
    Ok((loss, grad))
}

/// One optimizer step on `pairs`; returns the pre-update batch loss.
pub fn train_step(
    model: &mut ModelParams,
    state: &mut AdamState,
    pairs: &[&ImagePair],
    cfg: &TrainConfig,
    exec: &Executor,
) -> Result<f64> {
    let mode = Mode::Train { seed: rng::mix(cfg.seed, state.t) };
    let (loss, grad) = batch_gradient(model, pairs, mode, exec)?;
    let mut g = grad.flatten();
    if let Some(limit) = cfg.clip_norm {
        let norm = sqrt(g.iter().map(|v| v * v).sum());
        if norm > limit {
            g.iter_mut().for_each(|v| *v *= limit / norm);
        }
    }
    let mut flat = model.flatten();
    adam_step(&mut flat, &g, state, cfg)
        .map_err(|e| Error::Numerical { location: format!("step {}", state.t + 1), detail: format!("{e}") })?;
    model.load_flat(&flat)?;
    Ok(loss)
}

/// Progress notification after every optimizer step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub steps: usize,
    /// Seconds, when a clock is available.
    pub wall_time: Option<f64>,
}

pub fn train_epoch(
    model: &mut ModelParams,
    dataset: &DatasetHandle,
    cfg: &TrainConfig,
    state: &mut AdamState,
    epoch: usize,
    exec: &Executor,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<EpochStats> {
    cfg.validate()?;
    ensure!(!dataset.is_empty(), Validation, "dataset {} is empty", dataset.name);
    ensure!(
        state.m.len() == model.param_count(),
        Validation,
        "optimizer state holds {} values, model has {}",
        state.m.len(),
        model.param_count()
    );
    #[cfg(feature = "std")]
    let start = std::time::Instant::now();
    let order = batches(dataset.len(), cfg.batch_size, cfg.seed, epoch as u64)?;
    let mut total = 0.0;
    for idx in &order {
        let pairs: Vec<&ImagePair> = idx.iter().map(|&i| &dataset.items[i]).collect();
        let loss = train_step(model, state, &pairs, cfg, exec)?;
        total += loss;
        observer(&StepRecord { step: state.t, epoch, loss, lr: cfg.lr });
    }
    #[cfg(feature = "std")]
    let wall_time = Some(start.elapsed().as_secs_f64());
    #[cfg(not(feature = "std"))]
    let wall_time = None;
    Ok(EpochStats { mean_loss: total / order.len() as f64, steps: order.len(), wall_time })
}

/// Runs optimizer steps over seeded epoch shuffles until `state.t` reaches
/// `total_steps`, stopping mid-epoch if needed.
pub fn train_steps(
    model: &mut ModelParams,
    dataset: &DatasetHandle,
    cfg: &TrainConfig,
    state: &mut AdamState,
    total_steps: u64,
    exec: &Executor,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<()> {
    cfg.validate()?;
    ensure!(!dataset.is_empty(), Validation, "dataset {} is empty", dataset.name);
    let mut epoch = 0;
    while state.t < total_steps {
        for idx in batches(dataset.len(), cfg.batch_size, cfg.seed, epoch as u64)? {
            if state.t >= total_steps {
                break;
            }
            let pairs: Vec<&ImagePair> = idx.iter().map(|&i| &dataset.items[i]).collect();
            let loss = train_step(model, state, &pairs, cfg, exec)?;
            observer(&StepRecord { step: state.t, epoch, loss, lr: cfg.lr });
        }
        epoch += 1;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradCheckConfig {
    /// Parameters sampled (all of them if the model is smaller).
    pub coords: usize,
    pub step: f64,
    pub tolerance: f64,
    /// Differences below this are treated as agreement.
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { coords: 200, step: 1e-5, tolerance: 1e-4, abs_floor: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param_index: usize,
    pub worst_param_name: String,
    pub checked: usize,
    pub passed: bool,
}

/// Relative error `|a − b| / max(|a|, |b|, floor/tol)`.
pub fn relative_error(a: f64, b: f64, tolerance: f64, abs_floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(abs_floor / tolerance)
}

/// Compares the analytic L1 gradient for one sample against central
/// differences on a seeded subset of coordinates.
pub fn grad_check(model: &ModelParams, sample: &ImagePair, cfg: &GradCheckConfig, exec: &Executor) -> Result<GradCheckReport> {
    let (_, grad) = batch_gradient(model, &[sample], Mode::Eval, exec)?;
    let analytic = grad.flatten();
    let flat = model.flatten();
    let n = flat.len();
    let mut r = rng::seeded(cfg.seed);
    let mut coords = rng::permutation(&mut r, n);
    coords.truncate(cfg.coords.min(n));
    coords.sort_unstable();
    let loss_at = |values: &[f64]| -> Result<f64> {
        let mut m = model.clone();
        m.load_flat(values)?;
        let sr = m.forward(&sample.lr, exec)?;
        Ok(l1_loss(&sr, &sample.hr)?.0)
    };
    let (mut worst, mut worst_idx) = (0.0, coords.first().copied().unwrap_or(0));
    let mut probe = flat.clone();
    for &i in &coords {
        probe[i] = flat[i] + cfg.step;
        let up = loss_at(&probe)?;
        probe[i] = flat[i] - cfg.step;
        let down = loss_at(&probe)?;
        probe[i] = flat[i];
        let fd = (up - down) / (2.0 * cfg.step);
        let e = relative_error(analytic[i], fd, cfg.tolerance, cfg.abs_floor);
        if e > worst || !e.is_finite() {
            worst = e;
            worst_idx = i;
        }
    }
    let name = locate(&model.layout(), worst_idx).map(|(s, k)| format!("{s}[{k}]")).unwrap_or_default();
    Ok(GradCheckReport {
        max_rel_err: worst,
        worst_param_index: worst_idx,
        worst_param_name: name,
        checked: coords.len(),
        passed: worst < cfg.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_examples() {
        let a = Tensor::from_vec(&[2], vec![1.0, 0.0]).unwrap();
        let z = Tensor::zeros(&[2]);
        assert_eq!(l1_loss(&a, &z).unwrap().0, 0.5);
        let (l, g) = l1_loss(&z, &z).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|&v| v == 0.0));
        assert!(l1_loss(&a, &Tensor::zeros(&[3])).is_err());
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let cfg = TrainConfig { lr: 0.01, ..TrainConfig::default() };
        let mut p = vec![1.0, -2.0, 0.5];
        let mut s = AdamState::new(3);
        adam_step(&mut p, &[3.0, -0.5, 0.0], &mut s, &cfg).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] + 1.99).abs() < 1e-9);
        assert_eq!(p[2], 0.5);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn adam_refuses_nan() {
        let cfg = TrainConfig::default();
        let mut p = vec![1.0];
        let mut s = AdamState::new(1);
        assert!(adam_step(&mut p, &[f64::NAN], &mut s, &cfg).is_err());
        assert_eq!((p[0], s.t, s.m[0]), (1.0, 0, 0.0));
    }
}
