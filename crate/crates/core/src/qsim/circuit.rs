use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::noise::NoiseChannel;
use super::state::{apply_cnot, apply_rotation, pauli_expectation, StateVector};
use super::{Pauli, C64};
use crate::error::{ensure, Result};

/// Largest register accepted by the density-matrix path.
pub const MAX_DENSITY_QUBITS: usize = 8;

/// Trainable angles of one variational layer plus the structure they plug into.
///
/// For every rotation basis `R` (in order) the circuit applies the angle
/// embedding `S_R(x) = ⊗_i R(x_i)` followed by `depth` entangler layers, each a
/// column of `R(θ)` rotations and an open CNOT chain `(0,1), (1,2), …`. The
/// output lists `⟨P_i⟩` for every observable kind `P`, kind-major then
/// qubit-minor. `theta` is laid out `[basis][layer][qubit]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumLayerParams {
    n_qubits: usize,
    depth: usize,
    bases: Vec<Pauli>,
    observables: Vec<Pauli>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum AngleSource {
    Input(usize),
    Theta(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    Rot { axis: Pauli, qubit: usize, source: AngleSource },
    Cnot { control: usize, target: usize },
    /// Noise insertion point, after each entangler layer.
    Noise,
}

impl QuantumLayerParams {
    /// Circuit with an explicit rotation-basis sequence and observable set.
    pub fn with_structure(
        n_qubits: usize,
        depth: usize,
        bases: Vec<Pauli>,
        observables: Vec<Pauli>,
        theta: Vec<f64>,
    ) -> Result<Self> {
        ensure!(
            (1..=super::MAX_QUBITS).contains(&n_qubits),
            Capacity,
            "quantum layer needs 1..={} qubits, got {}",
            super::MAX_QUBITS,
            n_qubits
        );
        ensure!(depth >= 1, Validation, "circuit depth must be at least 1");
        ensure!(!bases.is_empty(), Validation, "at least one rotation basis is required");
        ensure!(!observables.is_empty(), Validation, "at least one observable kind is required");
        let expected = bases.len() * depth * n_qubits;
        ensure!(
            theta.len() == expected,
            Validation,
            "theta has {} angles, structure needs {}",
            theta.len(),
            expected
        );
        Ok(Self { n_qubits, depth, bases, observables, theta })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn bases(&self) -> &[Pauli] {
        &self.bases
    }

    pub fn observables(&self) -> &[Pauli] {
        &self.observables
    }

    pub fn output_width(&self) -> usize {
        self.observables.len() * self.n_qubits
    }

    pub fn theta_index(&self, basis: usize, layer: usize, qubit: usize) -> usize {
        (basis * self.depth + layer) * self.n_qubits + qubit
    }

    pub fn same_structure(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits
            && self.depth == other.depth
            && self.bases == other.bases
            && self.observables == other.observables
    }

    pub(crate) fn ops(&self) -> Vec<Op> {
        let n = self.n_qubits;
        let mut ops = Vec::with_capacity(self.bases.len() * (n + self.depth * (2 * n + 1)));
        for (b, &axis) in self.bases.iter().enumerate() {
            for i in 0..n {
                ops.push(Op::Rot { axis, qubit: i, source: AngleSource::Input(i) });
            }
            for l in 0..self.depth {
                for i in 0..n {
                    let source = AngleSource::Theta(self.theta_index(b, l, i));
                    ops.push(Op::Rot { axis, qubit: i, source });
                }
                for i in 0..n.saturating_sub(1) {
                    ops.push(Op::Cnot { control: i, target: i + 1 });
                }
                ops.push(Op::Noise);
            }
        }
        ops
    }

    pub(crate) fn angle(&self, inputs: &[f64], source: AngleSource) -> f64 {
        match source {
            AngleSource::Input(i) => inputs[i],
            AngleSource::Theta(k) => self.theta[k],
        }
    }

    pub(crate) fn check_inputs(&self, inputs: &[f64]) -> Result<()> {
        ensure!(
            inputs.len() == self.n_qubits,
            Validation,
            "circuit takes {} inputs, got {}",
            self.n_qubits,
            inputs.len()
        );
        ensure!(inputs.iter().all(|v| v.is_finite()), Validation, "circuit inputs must be finite");
        ensure!(self.theta.iter().all(|v| v.is_finite()), Validation, "circuit angles must be finite");
        Ok(())
    }

    /// Runs `ops[from..]` on `amps` in place.
    pub(crate) fn run_ops(&self, ops: &[Op], inputs: &[f64], amps: &mut [C64]) {
        for op in ops {
            match *op {
                Op::Rot { axis, qubit, source } => apply_rotation(amps, qubit, axis, self.angle(inputs, source)),
                Op::Cnot { control, target } => apply_cnot(amps, control, target),
                Op::Noise => {}
            }
        }
    }

    pub(crate) fn measure(&self, amps: &[C64], out: &mut Vec<f64>) {
        for &p in &self.observables {
            for q in 0..self.n_qubits {
                out.push(pauli_expectation(amps, q, p));
            }
        }
    }

    /// `Σ_j w_j ⟨O_j⟩` skipping zero weights.
    pub(crate) fn measure_weighted(&self, amps: &[C64], weights: &[f64]) -> f64 {
        let mut acc = 0.0;
        let n = self.n_qubits;
        for (k, &p) in self.observables.iter().enumerate() {
            for q in 0..n {
                let w = weights[k * n + q];
                if w != 0.0 {
                    acc += w * pauli_expectation(amps, q, p);
                }
            }
        }
        acc
    }

    /// Pure-state execution without input validation.
    pub(crate) fn execute(&self, ops: &[Op], inputs: &[f64], out: &mut Vec<f64>) {
        let mut state = StateVector::zero(self.n_qubits).expect("qubit count validated at construction");
        self.run_ops(ops, inputs, state.amplitudes_mut());
        self.measure(state.amplitudes(), out);
    }

    pub(crate) fn execute_noisy(&self, ops: &[Op], inputs: &[f64], noise: &NoiseChannel, out: &mut Vec<f64>) -> Result<()> {
        let mut rho = DensityMatrix::zero(self.n_qubits)?;
        for op in ops {
            match *op {
                Op::Rot { axis, qubit, source } => {
                    let m = super::rotation_matrix(axis, self.angle(inputs, source));
                    rho.apply_unitary_1q(qubit, &m);
                }
                Op::Cnot { control, target } => rho.apply_cnot_unchecked(control, target),
                Op::Noise => {
                    for q in 0..self.n_qubits {
                        noise.apply_unchecked(&mut rho, q);
                    }
                }
            }
        }
        for &p in &self.observables {
            for q in 0..self.n_qubits {
                out.push(rho.pauli_expectation(q, p));
            }
        }
        Ok(())
    }
}

/// Prepares `Π_R V(θ_R) S_R(x) |0…0⟩` and returns the observable expectations.
pub fn run_circuit(inputs: &[f64], params: &QuantumLayerParams) -> Result<Vec<f64>> {
    params.check_inputs(inputs)?;
    let mut out = Vec::with_capacity(params.output_width());
    params.execute(&params.ops(), inputs, &mut out);
    Ok(out)
}

/// Same circuit on a density matrix, with `noise` applied to every qubit after
/// each entangler layer.
pub fn run_noisy_circuit(inputs: &[f64], params: &QuantumLayerParams, noise: &NoiseChannel) -> Result<Vec<f64>> {
    ensure!(
        params.n_qubits() <= MAX_DENSITY_QUBITS,
        Capacity,
        "noisy execution supports at most {} qubits, circuit has {}",
        MAX_DENSITY_QUBITS,
        params.n_qubits()
    );
    params.check_inputs(inputs)?;
    let mut out = Vec::with_capacity(params.output_width());
    params.execute_noisy(&params.ops(), inputs, noise, &mut out)?;
    Ok(out)
}
