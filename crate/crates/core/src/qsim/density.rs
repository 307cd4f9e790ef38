use alloc::vec;
use alloc::vec::Vec;

use super::state::{apply_2x2, rotation_matrix, StateVector};
use super::{Gate, Observable, Pauli, C64};
use crate::error::{ensure, Result};

const MAX_QUBITS: usize = 8;

/// Mixed state `ρ` of an `n`-qubit register, stored row-major.
///
/// Entry `ρ[r, c]` lives at `(r << n) | c`, so the buffer can be treated as a
/// `2n`-qubit vector: row qubit `q` is bit `q + n`, column qubit `q` is bit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        ensure!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            Capacity,
            "density matrix supports 1..={} qubits, got {}",
            MAX_QUBITS,
            n_qubits
        );
        let dim = 1usize << n_qubits;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        entries[0] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, entries })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self> {
        let n_qubits = state.n_qubits();
        ensure!(n_qubits <= MAX_QUBITS, Capacity, "density matrix supports at most {} qubits", MAX_QUBITS);
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(amps[r] * amps[c].conj());
            }
        }
        Ok(Self { n_qubits, entries })
    }

    /// Builds `ρ` from a row-major `2^n × 2^n` matrix, checking hermiticity,
    /// unit trace and positivity of the diagonal.
    pub fn from_entries(n_qubits: usize, entries: Vec<C64>) -> Result<Self> {
        ensure!((1..=MAX_QUBITS).contains(&n_qubits), Capacity, "density matrix supports 1..={} qubits", MAX_QUBITS);
        let dim = 1usize << n_qubits;
        ensure!(entries.len() == dim * dim, Structure, "expected {} entries, got {}", dim * dim, entries.len());
        let rho = Self { n_qubits, entries };
        ensure!(rho.hermiticity_error() < 1e-12, Validation, "matrix is not Hermitian");
        ensure!((rho.trace().re - 1.0).abs() < 1e-12, Validation, "trace is {}, expected 1", rho.trace().re);
        ensure!(
            (0..dim).all(|i| rho.get(i, i).re >= -1e-10),
            Validation,
            "negative diagonal population"
        );
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row << self.n_qubits) | col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|ρ[r,c] - conj(ρ[c,r])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `ρ ← A ρ B†` on one qubit, where `row_op = A` and `col_op = conj(B)`.
    pub(crate) fn sandwich(&mut self, qubit: usize, row_op: &[[C64; 2]; 2], col_op: &[[C64; 2]; 2]) {
        apply_2x2(&mut self.entries, 1 << (qubit + self.n_qubits), row_op);
        apply_2x2(&mut self.entries, 1 << qubit, col_op);
    }

    pub(crate) fn apply_unitary_1q(&mut self, qubit: usize, u: &[[C64; 2]; 2]) {
        let conj = conj_matrix(u);
        self.sandwich(qubit, u, &conj);
    }

    pub(crate) fn apply_cnot_unchecked(&mut self, control: usize, target: usize) {
        let n = self.n_qubits;
        // permutation on the row index, then on the column index
        let row_c = 1usize << (control + n);
        let row_t = 1usize << (target + n);
        let col_c = 1usize << control;
        let col_t = 1usize << target;
        for i in 0..self.entries.len() {
            if i & row_c != 0 && i & row_t == 0 {
                self.entries.swap(i, i | row_t);
            }
        }
        for i in 0..self.entries.len() {
            if i & col_c != 0 && i & col_t == 0 {
                self.entries.swap(i, i | col_t);
            }
        }
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        let n = self.n_qubits;
        match *gate {
            Gate::Rotation { axis, qubit, angle } => {
                ensure!(qubit < n, Structure, "rotation on qubit {} of a {}-qubit register", qubit, n);
                ensure!(angle.is_finite(), Validation, "rotation angle {} is not finite", angle);
                self.apply_unitary_1q(qubit, &rotation_matrix(axis, angle));
            }
            Gate::Cnot { control, target } => {
                ensure!(
                    control < n && target < n && control != target,
                    Structure,
                    "invalid CNOT({}, {}) on {} qubits",
                    control,
                    target,
                    n
                );
                self.apply_cnot_unchecked(control, target);
            }
        }
        Ok(())
    }

    pub(crate) fn pauli_expectation(&self, qubit: usize, pauli: Pauli) -> f64 {
        let m = 1usize << qubit;
        let mut acc = 0.0;
        for r0 in 0..self.dim() {
            if r0 & m != 0 {
                continue;
            }
            let r1 = r0 | m;
            acc += match pauli {
                Pauli::Z => self.get(r0, r0).re - self.get(r1, r1).re,
                Pauli::X => 2.0 * self.get(r1, r0).re,
                Pauli::Y => -2.0 * self.get(r0, r1).im,
            };
        }
        acc.clamp(-1.0, 1.0)
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, obs: Observable) -> Result<f64> {
        ensure!(obs.qubit < self.n_qubits, Structure, "observable on qubit {} of {}", obs.qubit, self.n_qubits);
        Ok(self.pauli_expectation(obs.qubit, obs.pauli))
    }
}

pub(crate) fn conj_matrix(m: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}
