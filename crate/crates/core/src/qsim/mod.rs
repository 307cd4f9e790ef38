//! Exact simulation of small quantum circuits.
//!
//! Basis states are little-endian: qubit 0 is the least significant bit of the
//! amplitude index. Rotations follow `R_a(θ) = exp(-iθσ_a/2)` with angles kept
//! unreduced.

mod batch;
mod circuit;
mod density;
mod gradient;
mod noise;
mod state;

use serde::{Deserialize, Serialize};

pub use batch::{batch_execute, par_map, CircuitInstance, Executor};
pub use circuit::{run_circuit, run_noisy_circuit, QuantumLayerParams, MAX_DENSITY_QUBITS};
pub use density::DensityMatrix;
pub use gradient::parameter_shift_grad;
pub use noise::{apply_channel, NoiseChannel, NoiseKind};
pub use state::{apply_gate, expectation, rotation_matrix, StateVector, MAX_QUBITS};

pub type C64 = num_complex::Complex<f64>;

/// Single-qubit Pauli axis. Doubles as rotation axis and measured observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rotation { axis: Pauli, qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rx(qubit: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Pauli::X, qubit, angle }
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Pauli::Y, qubit, angle }
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Pauli::Z, qubit, angle }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable {
    pub pauli: Pauli,
    pub qubit: usize,
}

impl Observable {
    pub fn new(pauli: Pauli, qubit: usize) -> Self {
        Self { pauli, qubit }
    }
}
