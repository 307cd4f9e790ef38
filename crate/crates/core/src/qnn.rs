//! Trainable quantum layers: the variational `QuantumLayer` and the quantum MLP
//! (affine → variational circuit → affine).
//!
//! The rotation bases and measured observables depend on circuit depth `L`:
//! a single layer uses `R_Z` rotations and `Z` observables; deeper circuits
//! use `R_X, R_Y, R_Z` with `X, Y, Z` observables.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::params::{join, Parameters};
pub use crate::qsim::QuantumLayerParams;
use crate::qsim::{parameter_shift_grad, run_circuit, Executor, Pauli};
use crate::rng::{self, SeededRng};
use crate::math::TAU;

/// Largest qubit count a QMLP hidden layer may use.
pub const QMLP_MAX_QUBITS: usize = 10;

/// Rotation bases for a depth-`L` circuit.
pub fn bases_for_depth(depth: usize) -> Vec<Pauli> {
    if depth > 1 {
        vec![Pauli::X, Pauli::Y, Pauli::Z]
    } else {
        vec![Pauli::Z]
    }
}

/// Observable kinds for a depth-`L` circuit.
pub fn observables_for_depth(depth: usize) -> Vec<Pauli> {
    bases_for_depth(depth)
}

impl QuantumLayerParams {
    /// Layer following the depth rule, with explicit angles.
    pub fn new(n_qubits: usize, depth: usize, theta: Vec<f64>) -> Result<Self> {
        Self::with_structure(n_qubits, depth, bases_for_depth(depth), observables_for_depth(depth), theta)
    }

    /// Layer following the depth rule with angles drawn uniformly from `[0, 2π)`.
    pub fn init(n_qubits: usize, depth: usize, rng: &mut SeededRng) -> Result<Self> {
        Self::init_with_bases(n_qubits, depth, bases_for_depth(depth), observables_for_depth(depth), rng)
    }

    pub fn init_with_bases(
        n_qubits: usize,
        depth: usize,
        bases: Vec<Pauli>,
        observables: Vec<Pauli>,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let count = bases.len() * depth * n_qubits;
        let theta = (0..count).map(|_| rng::uniform(rng, 0.0, TAU)).collect();
        Self::with_structure(n_qubits, depth, bases, observables, theta)
    }
}

impl Parameters for QuantumLayerParams {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        f(&join(prefix, "theta"), &self.theta);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&join(prefix, "theta"), &mut self.theta);
    }
}

/// `⟨O_j⟩` for one input vector.
pub fn quantum_layer_forward(x: &[f64], p: &QuantumLayerParams) -> Result<Vec<f64>> {
    run_circuit(x, p)
}

/// Parameter-shift VJP for one input vector: `(dx, dθ)`.
pub fn quantum_layer_backward(x: &[f64], p: &QuantumLayerParams, cotangent: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    parameter_shift_grad(x, p, cotangent)
}

/// Affine map `y = W x + b` applied row-wise; `weight` is `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weight: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }

    /// Truncated-normal weights (std 0.02), zero bias.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut SeededRng) -> Self {
        let weight = (0..in_dim * out_dim).map(|_| rng::truncated_normal(rng, 0.02)).collect();
        Self { in_dim, out_dim, weight, bias: vec![0.0; out_dim] }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let rows = x.len() / self.in_dim;
        let mut y = Vec::with_capacity(rows * self.out_dim);
        for row in x.chunks_exact(self.in_dim) {
            for o in 0..self.out_dim {
                let w = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
                y.push(self.bias[o] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>());
            }
        }
        y
    }

    /// Accumulates weight/bias gradients into `grad` and returns `dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear) -> Vec<f64> {
        let mut dx = vec![0.0; x.len()];
        for ((row, drow), dxrow) in
            x.chunks_exact(self.in_dim).zip(dy.chunks_exact(self.out_dim)).zip(dx.chunks_exact_mut(self.in_dim))
        {
            for (o, &g) in drow.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                grad.bias[o] += g;
                let w = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
                let gw = &mut grad.weight[o * self.in_dim..(o + 1) * self.in_dim];
                for i in 0..self.in_dim {
                    gw[i] += g * row[i];
                    dxrow[i] += g * w[i];
                }
            }
        }
        dx
    }
}

impl Parameters for Linear {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        f(&join(prefix, "weight"), &self.weight);
        f(&join(prefix, "bias"), &self.bias);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&join(prefix, "weight"), &mut self.weight);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}

/// Quantum MLP: `post ∘ QuantumLayer ∘ pre`, no extra nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmlpParams {
    pub pre: Linear,
    pub qlayer: QuantumLayerParams,
    pub post: Linear,
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct QmlpCache {
    hidden: Vec<f64>,
    measured: Vec<f64>,
}

impl QmlpParams {
    /// `in_dim → hidden qubits → out_dim`.
    pub fn init(in_dim: usize, hidden: usize, out_dim: usize, depth: usize, rng: &mut SeededRng) -> Result<Self> {
        Self::init_with_basis(in_dim, hidden, out_dim, depth, Pauli::Z, rng)
    }

    /// As [`QmlpParams::init`], but a single-layer circuit rotates about
    /// `basis` (measured in `Z`); deeper circuits keep the depth rule.
    pub fn init_with_basis(
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        depth: usize,
        basis: Pauli,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        ensure!(
            hidden <= QMLP_MAX_QUBITS,
            Capacity,
            "QMLP hidden width {} exceeds the {}-qubit budget",
            hidden,
            QMLP_MAX_QUBITS
        );
        let pre = Linear::init(in_dim, hidden, rng);
        let qlayer = if depth == 1 {
            QuantumLayerParams::init_with_bases(hidden, 1, vec![basis], vec![Pauli::Z], rng)?
        } else {
            QuantumLayerParams::init(hidden, depth, rng)?
        };
        let post = Linear::init(qlayer.output_width(), out_dim, rng);
        Ok(Self { pre, qlayer, post })
    }

    pub fn from_parts(pre: Linear, qlayer: QuantumLayerParams, post: Linear) -> Result<Self> {
        ensure!(
            pre.out_dim == qlayer.n_qubits(),
            Validation,
            "pre map emits {} features for a {}-qubit layer",
            pre.out_dim,
            qlayer.n_qubits()
        );
        ensure!(
            post.in_dim == qlayer.output_width(),
            Validation,
            "post map takes {} features, quantum layer emits {}",
            post.in_dim,
            qlayer.output_width()
        );
        ensure!(qlayer.n_qubits() <= QMLP_MAX_QUBITS, Capacity, "QMLP exceeds the qubit budget");
        Ok(Self { pre, qlayer, post })
    }

    pub fn in_dim(&self) -> usize {
        self.pre.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.post.out_dim
    }

    /// Row-wise forward over `rows × in_dim` values.
    pub fn forward_rows(&self, x: &[f64], exec: &Executor) -> Result<(Vec<f64>, QmlpCache)> {
        ensure!(
            x.len().is_multiple_of(self.in_dim()),
            Validation,
            "QMLP input length {} is not a multiple of {}",
            x.len(),
            self.in_dim()
        );
        let hidden = self.pre.forward(x);
        let measured = exec.forward(&self.qlayer, &hidden)?;
        let y = self.post.forward(&measured);
        Ok((y, QmlpCache { hidden, measured }))
    }

    /// Accumulates parameter gradients into `grad`; returns `dx`.
    pub fn backward_rows(
        &self,
        x: &[f64],
        cache: &QmlpCache,
        dy: &[f64],
        grad: &mut QmlpParams,
        exec: &Executor,
    ) -> Result<Vec<f64>> {
        let d_measured = self.post.backward(&cache.measured, dy, &mut grad.post);
        let (d_hidden, d_theta) = exec.backward(&self.qlayer, &cache.hidden, &d_measured)?;
        for (g, d) in grad.qlayer.theta.iter_mut().zip(d_theta) {
            *g += d;
        }
        Ok(self.pre.backward(x, &d_hidden, &mut grad.pre))
    }
}

impl Parameters for QmlpParams {
    fn for_each(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        self.pre.for_each(&join(prefix, "pre"), f);
        self.qlayer.for_each(&join(prefix, "qlayer"), f);
        self.post.for_each(&join(prefix, "post"), f);
    }

    fn for_each_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.pre.for_each_mut(&join(prefix, "pre"), f);
        self.qlayer.for_each_mut(&join(prefix, "qlayer"), f);
        self.post.for_each_mut(&join(prefix, "post"), f);
    }
}

/// Single-vector QMLP forward.
pub fn qmlp_forward(x: &[f64], p: &QmlpParams) -> Result<Vec<f64>> {
    ensure!(x.len() == p.in_dim(), Validation, "QMLP expects {} inputs, got {}", p.in_dim(), x.len());
    Ok(p.forward_rows(x, &Executor::default())?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn depth_rule_selects_bases_and_width() {
        let mut r = seeded(1);
        let one = QuantumLayerParams::init(3, 1, &mut r).unwrap();
        assert_eq!(one.bases(), &[Pauli::Z]);
        assert_eq!(one.theta.len(), 3);
        assert_eq!(one.output_width(), 3);
        let two = QuantumLayerParams::init(3, 2, &mut r).unwrap();
        assert_eq!(two.bases(), &[Pauli::X, Pauli::Y, Pauli::Z]);
        assert_eq!(two.observables(), &[Pauli::X, Pauli::Y, Pauli::Z]);
        assert_eq!(two.output_width(), 9);
        assert_eq!(two.theta.len(), 3 * 2 * 3);
    }

    #[test]
    fn zero_angles_single_layer_measures_all_ones() {
        let p = QuantumLayerParams::new(4, 1, vec![0.0; 4]).unwrap();
        assert_eq!(quantum_layer_forward(&[0.0; 4], &p).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn rz_embedding_has_no_input_gradient_at_origin() {
        let p = QuantumLayerParams::new(1, 1, vec![0.0]).unwrap();
        let (dx, dtheta) = quantum_layer_backward(&[0.0], &p, &[1.0]).unwrap();
        assert_eq!(dx, vec![0.0]);
        assert_eq!(dtheta, vec![0.0]);
    }

    #[test]
    fn zero_cotangent_gives_zero_gradients() {
        let mut r = seeded(2);
        let p = QuantumLayerParams::init(4, 2, &mut r).unwrap();
        let (dx, dt) = quantum_layer_backward(&[0.3, -0.2, 1.0, 0.5], &p, &[0.0; 12]).unwrap();
        assert!(dx.iter().chain(&dt).all(|&g| g == 0.0));
    }

    #[test]
    fn outputs_are_bounded() {
        let mut r = seeded(3);
        let p = QuantumLayerParams::init(5, 2, &mut r).unwrap();
        let out = quantum_layer_forward(&[3.0, -2.0, 0.1, 7.0, -9.0], &p).unwrap();
        assert!(out.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn zero_pre_map_forces_post_of_ones() {
        let mut r = seeded(4);
        let mut p = QmlpParams::init(4, 8, 4, 1, &mut r).unwrap();
        p.pre = Linear::zeros(4, 8);
        p.qlayer.theta.fill(0.0);
        let y = qmlp_forward(&[0.4, -0.1, 0.9, 0.2], &p).unwrap();
        let expected = p.post.forward(&[1.0; 8]);
        assert_eq!(y, expected);
    }

    #[test]
    fn ratio_two_uses_eight_qubits() {
        let mut r = seeded(5);
        let p = QmlpParams::init(4, 4 * 2, 4, 1, &mut r).unwrap();
        assert_eq!(p.qlayer.n_qubits(), 8);
        assert!(QmlpParams::init(4, 11, 4, 1, &mut r).is_err());
    }

    #[test]
    fn flat_view_roundtrip() {
        let mut r = seeded(6);
        let p = QmlpParams::init(2, 4, 3, 2, &mut r).unwrap();
        let flat = p.flatten();
        assert_eq!(flat.len(), p.param_count());
        let mut q = p.zeros_like();
        q.load_flat(&flat).unwrap();
        assert_eq!(p, q);
        let names: Vec<_> = p.layout().into_iter().map(|s| s.name).collect();
        assert_eq!(names, ["pre.weight", "pre.bias", "qlayer.theta", "post.weight", "post.bias"]);
    }
}
