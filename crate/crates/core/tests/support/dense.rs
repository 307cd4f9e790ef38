//! Dense-matrix reference simulator used as an independent oracle.
//!
//! Operators are full `2^n × 2^n` matrices assembled by Kronecker products
//! (qubit 0 is the rightmost factor). Nothing here shares code with the
//! simulator under test.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity(dim: usize) -> Mat {
    (0..dim).map(|r| (0..dim).map(|k| if r == k { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

pub fn dagger(a: &Mat) -> Mat {
    let n = a.len();
    (0..a[0].len()).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac, br, bc) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ac * bc]; ar * br];
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn pauli(kind: char) -> Mat {
    match kind {
        'I' => identity(2),
        'X' => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        'Y' => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        'Z' => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
        _ => unreachable!(),
    }
}

/// `exp(-iθσ/2) = cos(θ/2) I - i sin(θ/2) σ`.
pub fn rot(kind: char, theta: f64) -> Mat {
    let i2 = identity(2);
    let s = pauli(kind);
    let (sn, cs) = (theta / 2.0).sin_cos();
    (0..2).map(|r| (0..2).map(|k| i2[r][k] * cs + c(0.0, -sn) * s[r][k]).collect()).collect()
}

/// Embeds a single-qubit operator on `qubit` of an `n`-qubit register.
pub fn on_qubit(op: &Mat, qubit: usize, n: usize) -> Mat {
    let mut full = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let factor = if q == qubit { op.clone() } else { identity(2) };
        full = kron(&full, &factor);
    }
    full
}

/// `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
pub fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
    let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let a = on_qubit(&p0, control, n);
    let b = matmul(&on_qubit(&p1, control, n), &on_qubit(&pauli('X'), target, n));
    a.iter().zip(&b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect()).collect()
}

pub fn apply(u: &Mat, psi: &[C]) -> Vec<C> {
    u.iter().map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum()).collect()
}

pub fn expect(op: &Mat, psi: &[C]) -> f64 {
    let opsi = apply(op, psi);
    psi.iter().zip(&opsi).map(|(a, b)| a.conj() * b).sum::<C>().re
}

pub fn ground(n: usize) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    v
}

/// Full unitary of the layered ansatz: for each basis, an angle embedding then
/// `depth` layers of rotations and an open CNOT chain. Later operations
/// multiply from the left.
pub fn layer_unitary(n: usize, depth: usize, bases: &[char], inputs: &[f64], theta: &[f64]) -> (Mat, Vec<Mat>) {
    let mut u = identity(1 << n);
    let mut entangler_ends = Vec::new();
    for (b, &axis) in bases.iter().enumerate() {
        for i in 0..n {
            u = matmul(&on_qubit(&rot(axis, inputs[i]), i, n), &u);
        }
        for l in 0..depth {
            for i in 0..n {
                let t = theta[(b * depth + l) * n + i];
                u = matmul(&on_qubit(&rot(axis, t), i, n), &u);
            }
            for i in 0..n.saturating_sub(1) {
                u = matmul(&cnot(i, i + 1, n), &u);
            }
            entangler_ends.push(u.clone());
        }
    }
    (u, entangler_ends)
}

pub fn layer_outputs(n: usize, depth: usize, bases: &[char], observables: &[char], inputs: &[f64], theta: &[f64]) -> Vec<f64> {
    let (u, _) = layer_unitary(n, depth, bases, inputs, theta);
    let psi = apply(&u, &ground(n));
    let mut out = Vec::new();
    for &o in observables {
        for q in 0..n {
            out.push(expect(&on_qubit(&pauli(o), q, n), &psi));
        }
    }
    out
}
