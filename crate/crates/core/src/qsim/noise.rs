use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::density::{conj_matrix, DensityMatrix};
use super::C64;
use crate::error::{ensure, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    BitFlip,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] =
        [NoiseKind::Depolarizing, NoiseKind::AmplitudeDamping, NoiseKind::PhaseDamping, NoiseKind::BitFlip];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
            NoiseKind::PhaseDamping => "phase_damping",
            NoiseKind::BitFlip => "bit_flip",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name || k.name().replace('_', "-") == name)
    }
}

/// Single-qubit noise channel with strength in `[0, 1]`.
///
/// Depolarizing uses `ρ → (1-p)ρ + p·I/2`, so `p = 1` yields the maximally
/// mixed state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    kind: NoiseKind,
    strength: f64,
}

type Kraus = [[C64; 2]; 2];

fn real(m: [[f64; 2]; 2]) -> Kraus {
    [[C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)], [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)]]
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, strength: f64) -> Result<Self> {
        ensure!(
            strength.is_finite() && (0.0..=1.0).contains(&strength),
            Validation,
            "noise strength {} outside [0, 1]",
            strength
        );
        Ok(Self { kind, strength })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn kraus(&self) -> Vec<Kraus> {
        let p = self.strength;
        let zero = C64::new(0.0, 0.0);
        match self.kind {
            NoiseKind::Depolarizing => {
                let a = math::sqrt(1.0 - 0.75 * p);
                let b = math::sqrt(p / 4.0);
                vec![
                    real([[a, 0.0], [0.0, a]]),
                    real([[0.0, b], [b, 0.0]]),
                    [[zero, C64::new(0.0, -b)], [C64::new(0.0, b), zero]],
                    real([[b, 0.0], [0.0, -b]]),
                ]
            }
            NoiseKind::AmplitudeDamping => vec![
                real([[1.0, 0.0], [0.0, math::sqrt(1.0 - p)]]),
                real([[0.0, math::sqrt(p)], [0.0, 0.0]]),
            ],
            NoiseKind::PhaseDamping => vec![
                real([[1.0, 0.0], [0.0, math::sqrt(1.0 - p)]]),
                real([[0.0, 0.0], [0.0, math::sqrt(p)]]),
            ],
            NoiseKind::BitFlip => {
                let a = math::sqrt(1.0 - p);
                let b = math::sqrt(p);
                vec![real([[a, 0.0], [0.0, a]]), real([[0.0, b], [b, 0.0]])]
            }
        }
    }

    /// `max |Σ K†K - I|` over matrix entries.
    pub fn completeness_error(&self) -> f64 {
        let mut sum = [[C64::new(0.0, 0.0); 2]; 2];
        for k in self.kraus() {
            for (i, row) in sum.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell += k[0][i].conj() * k[0][j] + k[1][i].conj() * k[1][j];
                }
            }
        }
        let mut worst = 0.0f64;
        for (i, row) in sum.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((cell - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub(crate) fn apply_unchecked(&self, rho: &mut DensityMatrix, qubit: usize) {
        if self.strength == 0.0 {
            return;
        }
        let ops = self.kraus();
        let original = rho.clone();
        let mut acc: Option<DensityMatrix> = None;
        for k in &ops {
            let mut term = original.clone();
            term.sandwich(qubit, k, &conj_matrix(k));
            match acc.as_mut() {
                None => acc = Some(term),
                Some(a) => a.add_assign(&term),
            }
        }
        *rho = acc.expect("every channel has at least one Kraus operator");
    }
}

impl DensityMatrix {
    fn add_assign(&mut self, other: &DensityMatrix) {
        for (a, b) in self.entries_mut().iter_mut().zip(other.entries()) {
            *a += b;
        }
    }
}

/// `ρ ← Σ_k K_k ρ K_k†` on one qubit.
pub fn apply_channel(mut rho: DensityMatrix, channel: &NoiseChannel, qubit: usize) -> Result<DensityMatrix> {
    ensure!(qubit < rho.n_qubits(), Structure, "channel on qubit {} of {}", qubit, rho.n_qubits());
    ensure!(channel.completeness_error() < 1e-12, Validation, "Kraus operators are not complete");
    channel.apply_unchecked(&mut rho, qubit);
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;
    use crate::qsim::{Gate, Observable, Pauli};

    #[test]
    fn completeness_on_strength_grid() {
        for kind in NoiseKind::ALL {
            for step in 0..=10 {
                let ch = NoiseChannel::new(kind, step as f64 / 10.0).unwrap();
                assert!(ch.completeness_error() < 1e-12, "{:?} {}", kind, step);
            }
        }
    }

    #[test]
    fn strength_out_of_range_is_rejected() {
        assert!(NoiseChannel::new(NoiseKind::BitFlip, 1.5).is_err());
        assert!(NoiseChannel::new(NoiseKind::BitFlip, -0.1).is_err());
        assert!(NoiseChannel::new(NoiseKind::BitFlip, f64::NAN).is_err());
    }

    #[test]
    fn depolarizing_zero_is_identity() {
        let mut rho = DensityMatrix::zero(2).unwrap();
        rho.apply(&Gate::rx(0, 0.8)).unwrap();
        rho.apply(&Gate::cnot(0, 1)).unwrap();
        let ch = NoiseChannel::new(NoiseKind::Depolarizing, 0.0).unwrap();
        let out = apply_channel(rho.clone(), &ch, 1).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn full_amplitude_damping_decays_to_ground() {
        let mut rho = DensityMatrix::zero(1).unwrap();
        rho.apply(&Gate::rx(0, PI)).unwrap();
        let ch = NoiseChannel::new(NoiseKind::AmplitudeDamping, 1.0).unwrap();
        let out = apply_channel(rho, &ch, 0).unwrap();
        assert!((out.get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(out.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn half_bit_flip_mixes_evenly() {
        let ch = NoiseChannel::new(NoiseKind::BitFlip, 0.5).unwrap();
        let out = apply_channel(DensityMatrix::zero(1).unwrap(), &ch, 0).unwrap();
        assert!((out.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!((out.get(1, 1).re - 0.5).abs() < 1e-12);
        assert!(out.get(0, 1).norm() < 1e-12);
    }

    #[test]
    fn full_depolarizing_erases_bloch_vector() {
        let mut rho = DensityMatrix::zero(1).unwrap();
        rho.apply(&Gate::ry(0, 0.9)).unwrap();
        rho.apply(&Gate::rz(0, 0.4)).unwrap();
        let ch = NoiseChannel::new(NoiseKind::Depolarizing, 1.0).unwrap();
        let out = apply_channel(rho, &ch, 0).unwrap();
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            assert!(out.expectation(Observable::new(p, 0)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn trace_is_preserved() {
        for kind in NoiseKind::ALL {
            let mut rho = DensityMatrix::zero(2).unwrap();
            rho.apply(&Gate::ry(0, 1.1)).unwrap();
            rho.apply(&Gate::cnot(0, 1)).unwrap();
            let ch = NoiseChannel::new(kind, 0.37).unwrap();
            let out = apply_channel(rho, &ch, 1).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            assert!(out.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn kind_names_parse() {
        for kind in NoiseKind::ALL {
            assert_eq!(NoiseKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(NoiseKind::parse("phase-damping"), Some(NoiseKind::PhaseDamping));
    }
}
