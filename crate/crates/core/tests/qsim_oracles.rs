mod support;

use qsr_core::math::{FRAC_PI_2, PI};
use qsr_core::qsim::{
    batch_execute, parameter_shift_grad, run_circuit, run_noisy_circuit, CircuitInstance, NoiseChannel,
    NoiseKind, Pauli, QuantumLayerParams,
};
use qsr_core::rng::{self, seeded};
use support::dense::{self, c};

fn axis_char(p: Pauli) -> char {
    match p {
        Pauli::X => 'X',
        Pauli::Y => 'Y',
        Pauli::Z => 'Z',
    }
}

fn random_layer(n: usize, depth: usize, seed: u64) -> (Vec<f64>, QuantumLayerParams) {
    let mut r = seeded(seed);
    let p = QuantumLayerParams::init(n, depth, &mut r).unwrap();
    let x: Vec<f64> = (0..n).map(|_| rng::uniform(&mut r, -PI, PI)).collect();
    (x, p)
}

fn oracle(x: &[f64], p: &QuantumLayerParams) -> Vec<f64> {
    let bases: Vec<char> = p.bases().iter().map(|&b| axis_char(b)).collect();
    let obs: Vec<char> = p.observables().iter().map(|&b| axis_char(b)).collect();
    dense::layer_outputs(p.n_qubits(), p.depth(), &bases, &obs, x, &p.theta)
}

#[test]
fn run_circuit_matches_dense_unitary() {
    for n in 1..=4 {
        for depth in [1, 2] {
            for seed in 0..50 {
                let (x, p) = random_layer(n, depth, seed * 31 + n as u64);
                let got = run_circuit(&x, &p).unwrap();
                let want = oracle(&x, &p);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-10, "n={n} L={depth} seed={seed}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn all_zero_single_layer_is_identity_circuit() {
    let p = QuantumLayerParams::new(3, 1, vec![0.0; 3]).unwrap();
    assert_eq!(run_circuit(&[0.0; 3], &p).unwrap(), vec![1.0; 3]);
}

#[test]
fn rx_input_and_angle_add_on_one_wire() {
    let (x, t) = (0.37, 1.21);
    let p = QuantumLayerParams::with_structure(1, 1, vec![Pauli::X], vec![Pauli::Z], vec![t]).unwrap();
    let got = run_circuit(&[x], &p).unwrap()[0];
    let psi = dense::apply(&dense::matmul(&dense::rot('X', t), &dense::rot('X', x)), &dense::ground(1));
    let want = dense::expect(&dense::pauli('Z'), &psi);
    assert!((got - want).abs() < 1e-12);
    assert!((got - (x + t).cos()).abs() < 1e-12);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let (_, p) = random_layer(3, 1, 0);
    assert!(run_circuit(&[0.1, 0.2], &p).is_err());
    assert!(run_circuit(&[0.1, f64::INFINITY, 0.0], &p).is_err());
}

#[test]
fn parameter_shift_single_rx() {
    let p = QuantumLayerParams::with_structure(1, 1, vec![Pauli::X], vec![Pauli::Z], vec![FRAC_PI_2]).unwrap();
    let (dx, dt) = parameter_shift_grad(&[0.0], &p, &[1.0]).unwrap();
    assert!((dt[0] + 1.0).abs() < 1e-12);
    assert!((dx[0] + 1.0).abs() < 1e-12);
}

fn check_against_fd(x: &[f64], p: &QuantumLayerParams, cot: &[f64]) {
    let h = 1e-5;
    let f = |x: &[f64], p: &QuantumLayerParams| -> f64 {
        run_circuit(x, p).unwrap().iter().zip(cot).map(|(a, b)| a * b).sum()
    };
    let (dx, dt) = parameter_shift_grad(x, p, cot).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= (1e-5 * a.abs().max(b.abs())).max(1e-8);
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let fd = (f(&xp, p) - f(&xm, p)) / (2.0 * h);
        assert!(close(dx[i], fd), "input {i}: shift {} vs fd {}", dx[i], fd);
    }
    for k in 0..p.theta.len() {
        let mut pp = p.clone();
        let mut pm = p.clone();
        pp.theta[k] += h;
        pm.theta[k] -= h;
        let fd = (f(x, &pp) - f(x, &pm)) / (2.0 * h);
        assert!(close(dt[k], fd), "theta {k}: shift {} vs fd {}", dt[k], fd);
    }
}

#[test]
fn parameter_shift_matches_finite_differences() {
    for seed in 0..10 {
        let (x, p) = random_layer(4, 2, 100 + seed);
        let mut r = seeded(900 + seed);
        let cot: Vec<f64> = (0..p.output_width()).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect();
        check_against_fd(&x, &p, &cot);
    }
    // mixed bases, including an RX-embedded single layer
    let mut r = seeded(77);
    let p = QuantumLayerParams::init_with_bases(3, 1, vec![Pauli::X, Pauli::Z], vec![Pauli::Z, Pauli::Y], &mut r)
        .unwrap();
    check_against_fd(&[0.3, -1.2, 2.0], &p, &[1.0, -0.5, 0.25, 0.7, 0.1, -0.9]);
}

#[test]
fn noiseless_channel_matches_pure_execution() {
    for kind in NoiseKind::ALL {
        for seed in 0..5 {
            let (x, p) = random_layer(3, 2, seed);
            let ch = NoiseChannel::new(kind, 0.0).unwrap();
            let noisy = run_noisy_circuit(&x, &p, &ch).unwrap();
            let pure = run_circuit(&x, &p).unwrap();
            for (a, b) in noisy.iter().zip(&pure) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn full_depolarizing_zeroes_every_expectation() {
    let (x, p) = random_layer(3, 2, 5);
    let ch = NoiseChannel::new(NoiseKind::Depolarizing, 1.0).unwrap();
    for v in run_noisy_circuit(&x, &p, &ch).unwrap() {
        assert!(v.abs() < 1e-10);
    }
}

#[test]
fn noisy_circuit_rejects_large_registers() {
    let (x, p) = random_layer(9, 1, 5);
    let ch = NoiseChannel::new(NoiseKind::BitFlip, 0.1).unwrap();
    assert!(matches!(run_noisy_circuit(&x, &p, &ch), Err(qsr_core::Error::Capacity(_))));
}

/// Phase damping on a 2-qubit circuit against explicit 4×4 Kraus algebra.
#[test]
fn phase_damping_matches_dense_kraus_sum() {
    let lambda = 0.3;
    let (x, p) = random_layer(2, 2, 11);
    let ch = NoiseChannel::new(NoiseKind::PhaseDamping, lambda).unwrap();
    let got = run_noisy_circuit(&x, &p, &ch).unwrap();

    let k0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c((1.0 - lambda).sqrt(), 0.0)]];
    let k1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(lambda.sqrt(), 0.0)]];
    let n = 2;
    let bases = ['X', 'Y', 'Z'];
    let mut rho = {
        let g = dense::ground(n);
        g.iter().map(|a| g.iter().map(|b| a * b.conj()).collect::<Vec<_>>()).collect::<dense::Mat>()
    };
    let conjugate = |u: &dense::Mat, rho: &dense::Mat| dense::matmul(&dense::matmul(u, rho), &dense::dagger(u));
    for (b, &axis) in bases.iter().enumerate() {
        for i in 0..n {
            rho = conjugate(&dense::on_qubit(&dense::rot(axis, x[i]), i, n), &rho);
        }
        for l in 0..2 {
            for i in 0..n {
                let t = p.theta[(b * 2 + l) * n + i];
                rho = conjugate(&dense::on_qubit(&dense::rot(axis, t), i, n), &rho);
            }
            rho = conjugate(&dense::cnot(0, 1, n), &rho);
            for q in 0..n {
                let a = conjugate(&dense::on_qubit(&k0, q, n), &rho);
                let bterm = conjugate(&dense::on_qubit(&k1, q, n), &rho);
                rho = a.iter().zip(&bterm).map(|(r1, r2)| r1.iter().zip(r2).map(|(u, v)| u + v).collect()).collect();
            }
        }
    }
    let mut want = Vec::new();
    for o in ['X', 'Y', 'Z'] {
        for q in 0..n {
            let prod = dense::matmul(&rho, &dense::on_qubit(&dense::pauli(o), q, n));
            want.push((0..4).map(|i| prod[i][i]).sum::<num_complex::Complex64>().re);
        }
    }
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn batch_execution_is_worker_invariant() {
    let layers: Vec<(Vec<f64>, QuantumLayerParams)> = (0..100).map(|s| random_layer(4, 2, 5000 + s)).collect();
    let instances: Vec<_> = layers.iter().map(|(x, p)| CircuitInstance { inputs: x, params: p }).collect();
    let one = batch_execute(&instances, 1).unwrap();
    let eight = batch_execute(&instances, 8).unwrap();
    for (a, b) in one.iter().zip(&eight) {
        assert!(a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
    assert!(batch_execute(&[], 4).unwrap().is_empty());
}

#[test]
fn batch_of_window_circuits_preserves_order() {
    let mut r = seeded(8);
    let p = QuantumLayerParams::init_with_bases(4, 1, vec![Pauli::X], vec![Pauli::Z], &mut r).unwrap();
    let inputs: Vec<Vec<f64>> = (0..49).map(|_| (0..4).map(|_| rng::uniform(&mut r, -2.0, 2.0)).collect()).collect();
    let instances: Vec<_> = inputs.iter().map(|x| CircuitInstance { inputs: x, params: &p }).collect();
    let batched = batch_execute(&instances, 3).unwrap();
    assert_eq!(batched.len(), 49);
    for (x, out) in inputs.iter().zip(&batched) {
        assert_eq!(&run_circuit(x, &p).unwrap(), out);
    }
}

#[test]
fn heterogeneous_batch_is_rejected() {
    let (x1, p1) = random_layer(3, 1, 1);
    let (x2, p2) = random_layer(3, 2, 2);
    let instances = [CircuitInstance { inputs: &x1, params: &p1 }, CircuitInstance { inputs: &x2, params: &p2 }];
    assert!(matches!(batch_execute(&instances, 1), Err(qsr_core::Error::Validation(_))));
}
