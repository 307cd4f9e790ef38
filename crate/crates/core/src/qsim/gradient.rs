use alloc::vec;
use alloc::vec::Vec;

use super::circuit::{AngleSource, Op, QuantumLayerParams};
use super::state::{apply_rotation, StateVector};
use super::C64;
use crate::error::{ensure, Result};
use crate::math::FRAC_PI_2;

/// Vector-Jacobian product of [`run_circuit`](super::run_circuit) by the
/// parameter-shift rule.
///
/// Every rotation angle `φ` (embedding or trainable) contributes
/// `[f(φ+π/2) - f(φ-π/2)] / 2 · cotangent`. An input feeding several
/// embedding rotations accumulates all of them. Returns `(d_inputs, d_theta)`.
pub fn parameter_shift_grad(
    inputs: &[f64],
    params: &QuantumLayerParams,
    cotangent: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_inputs(inputs)?;
    ensure!(
        cotangent.len() == params.output_width(),
        Validation,
        "cotangent has {} entries, circuit emits {}",
        cotangent.len(),
        params.output_width()
    );
    let mut d_inputs = vec![0.0; params.n_qubits()];
    let mut d_theta = vec![0.0; params.theta.len()];
    weighted_parameter_shift(&params.ops(), inputs, params, cotangent, &mut d_inputs, &mut d_theta);
    Ok((d_inputs, d_theta))
}

/// Accumulating kernel behind [`parameter_shift_grad`].
///
/// The state just before each rotation is cached during one forward sweep so
/// every shifted evaluation only replays the suffix of the circuit.
pub(crate) fn weighted_parameter_shift(
    ops: &[Op],
    inputs: &[f64],
    params: &QuantumLayerParams,
    cotangent: &[f64],
    d_inputs: &mut [f64],
    d_theta: &mut [f64],
) {
    if cotangent.iter().all(|&c| c == 0.0) {
        return;
    }
    let mut state = StateVector::zero(params.n_qubits()).expect("qubit count validated at construction");
    let dim = state.amplitudes().len();
    let rotations: Vec<usize> =
        ops.iter().enumerate().filter(|(_, op)| matches!(op, Op::Rot { .. })).map(|(i, _)| i).collect();
    let mut snapshots: Vec<C64> = Vec::with_capacity(rotations.len() * dim);
    let mut next = 0;
    for &r in &rotations {
        params.run_ops(&ops[next..r], inputs, state.amplitudes_mut());
        snapshots.extend_from_slice(state.amplitudes());
        next = r;
    }

    let mut work = vec![C64::new(0.0, 0.0); dim];
    for (k, &r) in rotations.iter().enumerate() {
        let Op::Rot { axis, qubit, source } = ops[r] else { unreachable!() };
        let angle = params.angle(inputs, source);
        let snapshot = &snapshots[k * dim..(k + 1) * dim];
        let mut shifted = [0.0; 2];
        for (slot, shift) in shifted.iter_mut().zip([FRAC_PI_2, -FRAC_PI_2]) {
            work.copy_from_slice(snapshot);
            apply_rotation(&mut work, qubit, axis, angle + shift);
            params.run_ops(&ops[r + 1..], inputs, &mut work);
            *slot = params.measure_weighted(&work, cotangent);
        }
        let g = 0.5 * (shifted[0] - shifted[1]);
        match source {
            AngleSource::Input(i) => d_inputs[i] += g,
            AngleSource::Theta(t) => d_theta[t] += g,
        }
    }
}
