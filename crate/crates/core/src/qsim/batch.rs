use alloc::vec;
use alloc::vec::Vec;

use super::circuit::{QuantumLayerParams, MAX_DENSITY_QUBITS};
use super::gradient::weighted_parameter_shift;
use super::noise::NoiseChannel;
use crate::error::{bail, ensure, Result};

/// Maps `f` over `0..count`, splitting the range into contiguous chunks across
/// `workers` threads. Output order matches index order, and each element is
/// computed by the same code path regardless of the worker count.
#[cfg(feature = "std")]
pub fn par_map<R, F>(count: usize, workers: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(workers);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(count);
                let hi = ((w + 1) * chunk).min(count);
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("circuit worker panicked")).collect()
    })
}

#[cfg(not(feature = "std"))]
pub fn par_map<R, F>(count: usize, _workers: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..count).map(f).collect()
}

/// How quantum layers are executed: worker count for batches and an optional
/// noise channel that switches execution to the density-matrix path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Executor {
    pub workers: usize,
    pub noise: Option<NoiseChannel>,
}

impl Default for Executor {
    fn default() -> Self {
        Self { workers: 1, noise: None }
    }
}

impl Executor {
    pub fn new(workers: usize) -> Self {
        Self { workers: workers.max(1), noise: None }
    }

    pub fn with_noise(mut self, noise: Option<NoiseChannel>) -> Self {
        self.noise = noise;
        self
    }

    /// Runs one circuit per row of `inputs` (row length `n_qubits`) and returns
    /// the concatenated outputs.
    pub fn forward(&self, params: &QuantumLayerParams, inputs: &[f64]) -> Result<Vec<f64>> {
        let n = params.n_qubits();
        ensure!(inputs.len().is_multiple_of(n), Validation, "input length {} is not a multiple of {}", inputs.len(), n);
        ensure!(inputs.iter().all(|v| v.is_finite()), Validation, "circuit inputs must be finite");
        ensure!(params.theta.iter().all(|v| v.is_finite()), Validation, "circuit angles must be finite");
        if let Some(noise) = &self.noise {
            ensure!(
                n <= MAX_DENSITY_QUBITS,
                Capacity,
                "noisy execution supports at most {} qubits, circuit has {}",
                MAX_DENSITY_QUBITS,
                n
            );
            let ops = params.ops();
            let rows = par_map(inputs.len() / n, self.workers, |i| {
                let mut out = Vec::with_capacity(params.output_width());
                params.execute_noisy(&ops, &inputs[i * n..(i + 1) * n], noise, &mut out).map(|_| out)
            });
            let mut flat = Vec::with_capacity(rows.len() * params.output_width());
            for row in rows {
                flat.extend(row?);
            }
            return Ok(flat);
        }
        let ops = params.ops();
        let rows = par_map(inputs.len() / n, self.workers, |i| {
            let mut out = Vec::with_capacity(params.output_width());
            params.execute(&ops, &inputs[i * n..(i + 1) * n], &mut out);
            out
        });
        Ok(rows.concat())
    }

    /// Parameter-shift VJP for a batch: returns per-row input gradients
    /// (concatenated) and the trainable-angle gradient summed over rows in
    /// index order.
    pub fn backward(
        &self,
        params: &QuantumLayerParams,
        inputs: &[f64],
        cotangents: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.noise.is_some() {
            bail!(Validation, "gradients are only available for noiseless execution");
        }
        let n = params.n_qubits();
        let width = params.output_width();
        ensure!(inputs.len().is_multiple_of(n), Validation, "input length {} is not a multiple of {}", inputs.len(), n);
        let count = inputs.len() / n;
        ensure!(
            cotangents.len() == count * width,
            Validation,
            "expected {} cotangent entries, got {}",
            count * width,
            cotangents.len()
        );
        let ops = params.ops();
        let rows = par_map(count, self.workers, |i| {
            let mut dx = vec![0.0; n];
            let mut dtheta = vec![0.0; params.theta.len()];
            weighted_parameter_shift(
                &ops,
                &inputs[i * n..(i + 1) * n],
                params,
                &cotangents[i * width..(i + 1) * width],
                &mut dx,
                &mut dtheta,
            );
            (dx, dtheta)
        });
        let mut d_inputs = Vec::with_capacity(count * n);
        let mut d_theta = vec![0.0; params.theta.len()];
        for (dx, dt) in rows {
            d_inputs.extend(dx);
            for (acc, g) in d_theta.iter_mut().zip(dt) {
                *acc += g;
            }
        }
        Ok((d_inputs, d_theta))
    }
}

/// One circuit evaluation request.
#[derive(Debug, Clone, Copy)]
pub struct CircuitInstance<'a> {
    pub inputs: &'a [f64],
    pub params: &'a QuantumLayerParams,
}

/// Runs independent circuit instances that share one structure (qubit count,
/// depth, bases, observables), preserving order. Results are bitwise
/// independent of `workers`.
pub fn batch_execute(instances: &[CircuitInstance<'_>], workers: usize) -> Result<Vec<Vec<f64>>> {
    let Some(first) = instances.first() else {
        return Ok(Vec::new());
    };
    for (i, inst) in instances.iter().enumerate() {
        ensure!(
            inst.params.same_structure(first.params),
            Validation,
            "instance {} has a different circuit structure than instance 0",
            i
        );
        inst.params.check_inputs(inst.inputs)?;
    }
    let ops = first.params.ops();
    Ok(par_map(instances.len(), workers, |i| {
        let inst = &instances[i];
        let mut out = Vec::with_capacity(inst.params.output_width());
        inst.params.execute(&ops, inst.inputs, &mut out);
        out
    }))
}
