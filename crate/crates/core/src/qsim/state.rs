use alloc::vec;
use alloc::vec::Vec;

use super::{Gate, Observable, Pauli, C64};
use crate::error::{bail, ensure, Result};
use crate::math;

pub const MAX_QUBITS: usize = 12;

/// Pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

/// 2×2 matrix of `exp(-iθσ/2)`.
pub fn rotation_matrix(axis: Pauli, angle: f64) -> [[C64; 2]; 2] {
    let (s, c) = math::sin_cos(angle / 2.0);
    let zero = C64::new(0.0, 0.0);
    match axis {
        Pauli::X => [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]],
        Pauli::Y => [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]],
        Pauli::Z => [[C64::new(c, -s), zero], [zero, C64::new(c, s)]],
    }
}

/// Applies `m` to the qubit addressed by `mask` of a little-endian amplitude
/// buffer.
#[inline]
pub(crate) fn apply_2x2(amps: &mut [C64], mask: usize, m: &[[C64; 2]; 2]) {
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i0 in base..base + mask {
            let i1 = i0 | mask;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += mask << 1;
    }
}

#[inline]
pub(crate) fn apply_rotation(amps: &mut [C64], qubit: usize, axis: Pauli, angle: f64) {
    let mask = 1usize << qubit;
    let (s, c) = math::sin_cos(angle / 2.0);
    let dim = amps.len();
    let mut base = 0;
    match axis {
        Pauli::Z => {
            let lo = C64::new(c, -s);
            let hi = C64::new(c, s);
            while base < dim {
                for i0 in base..base + mask {
                    amps[i0] *= lo;
                    amps[i0 | mask] *= hi;
                }
                base += mask << 1;
            }
        }
        Pauli::X => {
            while base < dim {
                for i0 in base..base + mask {
                    let i1 = i0 | mask;
                    let (a0, a1) = (amps[i0], amps[i1]);
                    // -i s a = (s a.im, -s a.re)
                    amps[i0] = C64::new(c * a0.re + s * a1.im, c * a0.im - s * a1.re);
                    amps[i1] = C64::new(c * a1.re + s * a0.im, c * a1.im - s * a0.re);
                }
                base += mask << 1;
            }
        }
        Pauli::Y => {
            while base < dim {
                for i0 in base..base + mask {
                    let i1 = i0 | mask;
                    let (a0, a1) = (amps[i0], amps[i1]);
                    amps[i0] = a0 * c - a1 * s;
                    amps[i1] = a0 * s + a1 * c;
                }
                base += mask << 1;
            }
        }
    }
}

#[inline]
pub(crate) fn apply_cnot(amps: &mut [C64], control: usize, target: usize) {
    let cm = 1usize << control;
    let tm = 1usize << target;
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

/// `⟨ψ|σ_q|ψ⟩` for a single-qubit Pauli.
#[inline]
pub(crate) fn pauli_expectation(amps: &[C64], qubit: usize, pauli: Pauli) -> f64 {
    let mask = 1usize << qubit;
    let dim = amps.len();
    let mut acc = 0.0;
    let mut base = 0;
    match pauli {
        Pauli::Z => {
            while base < dim {
                for i0 in base..base + mask {
                    acc += amps[i0].norm_sqr() - amps[i0 | mask].norm_sqr();
                }
                base += mask << 1;
            }
        }
        Pauli::X | Pauli::Y => {
            while base < dim {
                for i0 in base..base + mask {
                    let z = amps[i0].conj() * amps[i0 | mask];
                    acc += if pauli == Pauli::X { z.re } else { z.im };
                }
                base += mask << 1;
            }
            acc *= 2.0;
        }
    }
    acc.clamp(-1.0, 1.0)
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        ensure!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            Capacity,
            "statevector supports 1..={} qubits, got {}",
            MAX_QUBITS,
            n_qubits
        );
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps explicit amplitudes; the vector must have power-of-two length and
    /// unit norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        ensure!(len >= 2 && len.is_power_of_two(), Structure, "amplitude count {} is not 2^n", len);
        let n_qubits = len.trailing_zeros() as usize;
        ensure!(n_qubits <= MAX_QUBITS, Capacity, "{} qubits exceeds limit {}", n_qubits, MAX_QUBITS);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        ensure!((norm - 1.0).abs() < 1e-10, Validation, "state norm² is {}, expected 1", norm);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        let n = self.n_qubits;
        match *gate {
            Gate::Rotation { axis, qubit, angle } => {
                ensure!(qubit < n, Structure, "rotation on qubit {} of a {}-qubit register", qubit, n);
                ensure!(angle.is_finite(), Validation, "rotation angle {} is not finite", angle);
                apply_rotation(&mut self.amps, qubit, axis, angle);
            }
            Gate::Cnot { control, target } => {
                ensure!(
                    control < n && target < n,
                    Structure,
                    "CNOT({}, {}) on a {}-qubit register",
                    control,
                    target,
                    n
                );
                if control == target {
                    bail!(Structure, "CNOT control and target are both qubit {}", control);
                }
                apply_cnot(&mut self.amps, control, target);
            }
        }
        Ok(())
    }

    pub fn expectation(&self, obs: Observable) -> Result<f64> {
        ensure!(
            obs.qubit < self.n_qubits,
            Structure,
            "observable on qubit {} of a {}-qubit register",
            obs.qubit,
            self.n_qubits
        );
        Ok(pauli_expectation(&self.amps, obs.qubit, obs.pauli))
    }
}

/// Applies one gate, consuming and returning the state.
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn expectation(state: &StateVector, obs: Observable) -> Result<f64> {
    state.expectation(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{FRAC_PI_2, PI};
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn rx_pi_flips_to_minus_i_one() {
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::rx(0, PI)).unwrap();
        assert!(close(s.amplitudes()[0], C64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], C64::new(0.0, -1.0)));
    }

    #[test]
    fn rx_zero_is_identity() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::ry(0, 0.7)).unwrap();
        s.apply(&Gate::cnot(0, 1)).unwrap();
        let before = s.clone();
        s.apply(&Gate::rx(1, 0.0)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn cnot_maps_01_to_11() {
        // qubit 0 set: index 1
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&Gate::rx(0, PI)).unwrap();
        s.apply(&Gate::cnot(0, 1)).unwrap();
        assert!(s.amplitudes()[3].norm_sqr() > 1.0 - 1e-12);
    }

    #[test]
    fn z_expectations() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.expectation(Observable::new(Pauli::Z, 0)).unwrap(), 1.0);
        let s = apply_gate(s, &Gate::rx(0, PI / 3.0)).unwrap();
        let z = s.expectation(Observable::new(Pauli::Z, 0)).unwrap();
        assert!((z - 0.5).abs() < 1e-12);
    }

    #[test]
    fn x_expectation_on_plus_state() {
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::ry(0, FRAC_PI_2)).unwrap();
        let x = s.expectation(Observable::new(Pauli::X, 0)).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        let y = s.expectation(Observable::new(Pauli::Y, 0)).unwrap();
        assert!(y.abs() < 1e-12);
    }

    #[test]
    fn y_expectation_sign() {
        // RX(-π/2)|0⟩ = (|0⟩ + i|1⟩)/√2, the +1 eigenstate of Y
        let s = apply_gate(StateVector::zero(1).unwrap(), &Gate::rx(0, -FRAC_PI_2)).unwrap();
        let y = s.expectation(Observable::new(Pauli::Y, 0)).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_matrix_agrees_with_kernel() {
        for axis in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut a = vec![C64::new(0.3, -0.1), C64::new(0.2, 0.9)];
            let mut b = a.clone();
            apply_2x2(&mut a, 1, &rotation_matrix(axis, 1.234));
            apply_rotation(&mut b, 0, axis, 1.234);
            assert!(close(a[0], b[0]) && close(a[1], b[1]), "{:?}", axis);
        }
    }

    #[test]
    fn structural_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply(&Gate::rx(2, 0.1)), Err(crate::Error::Structure(_))));
        assert!(matches!(s.apply(&Gate::cnot(1, 1)), Err(crate::Error::Structure(_))));
        assert!(matches!(s.apply(&Gate::rz(0, f64::NAN)), Err(crate::Error::Validation(_))));
        assert!(StateVector::zero(13).is_err());
        assert!(s.expectation(Observable::new(Pauli::Z, 5)).is_err());
    }

    fn random_gate(rng: &mut rng::SeededRng, n: usize) -> Gate {
        let q = rng.gen_range(0..n);
        match rng.gen_range(0..4) {
            0 => Gate::rx(q, rng::uniform(rng, -7.0, 7.0)),
            1 => Gate::ry(q, rng::uniform(rng, -7.0, 7.0)),
            2 => Gate::rz(q, rng::uniform(rng, -7.0, 7.0)),
            _ if n > 1 => {
                let t = (q + rng.gen_range(1..n)) % n;
                Gate::cnot(q, t)
            }
            _ => Gate::rx(q, 0.3),
        }
    }

    proptest! {
        #[test]
        fn norm_is_preserved(seed in any::<u64>(), n in 1usize..=6, len in 0usize..=100) {
            let mut r = rng::seeded(seed);
            let mut s = StateVector::zero(n).unwrap();
            for _ in 0..len {
                s.apply(&random_gate(&mut r, n)).unwrap();
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn inner_product_is_invariant(seed in any::<u64>(), n in 1usize..=5) {
            let mut r = rng::seeded(seed);
            let mut a = StateVector::zero(n).unwrap();
            let mut b = StateVector::zero(n).unwrap();
            for _ in 0..20 {
                a.apply(&random_gate(&mut r, n)).unwrap();
                b.apply(&random_gate(&mut r, n)).unwrap();
            }
            let before = a.inner(&b);
            for _ in 0..20 {
                let g = random_gate(&mut r, n);
                a.apply(&g).unwrap();
                b.apply(&g).unwrap();
            }
            prop_assert!((a.inner(&b) - before).norm() < 1e-12);
        }
    }
}
