//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use whichpath::circuits::{physical_circuit, CircuitConfig, CircuitFamily, Wire};
use whichpath::linalg::{tensor, Complex, Matrix2, Matrix4};

pub const STRONG_BETA: [f64; 5] = [0.06, 0.09, -0.05, -0.07, 0.06];

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn zeros4() -> [[Complex; 4]; 4] {
    [[c(0.0, 0.0); 4]; 4]
}

pub fn matmul(a: &[[Complex; 4]; 4], b: &[[Complex; 4]; 4]) -> [[Complex; 4]; 4] {
    let mut out = zeros4();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn max_diff(a: &[[Complex; 4]; 4], b: &[[Complex; 4]; 4]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(a: &[[Complex; 4]; 4]) -> [[Complex; 4]; 4] {
    let norm = a.iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let mut scaled = zeros4();
    for i in 0..4 {
        for j in 0..4 {
            scaled[i][j] = a[i][j] * scale;
        }
    }
    let mut result = zeros4();
    let mut term = zeros4();
    for i in 0..4 {
        result[i][i] = c(1.0, 0.0);
        term[i][i] = c(1.0, 0.0);
    }
    for k in 1..30 {
        term = matmul(&term, &scaled);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    result
}

pub fn pauli(label: char) -> [[Complex; 2]; 2] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match label {
        'I' => [[o, z], [z, o]],
        'X' => [[z, o], [o, z]],
        'Y' => [[z, -i], [i, z]],
        'Z' => [[o, z], [z, -o]],
        _ => panic!("unknown Pauli {label}"),
    }
}

/// `A ⊗ B` for Pauli labels, first factor on the control.
pub fn pauli2(a: char, b: char) -> [[Complex; 4]; 4] {
    tensor(&Matrix2::new(pauli(a)), &Matrix2::new(pauli(b))).0
}

/// `exp(−i(π/4)(ZX + β₁IY + β₂IZ + β₃IX + β₄ZY + β₅ZZ))`.
pub fn u_eff_oracle(beta: &[f64; 5]) -> [[Complex; 4]; 4] {
    let terms = [("ZX", 1.0), ("IY", beta[0]), ("IZ", beta[1]), ("IX", beta[2]), ("ZY", beta[3]), ("ZZ", beta[4])];
    let mut h = zeros4();
    for (label, w) in terms {
        let mut ch = label.chars();
        let p = pauli2(ch.next().unwrap(), ch.next().unwrap());
        for i in 0..4 {
            for j in 0..4 {
                h[i][j] += p[i][j] * w;
            }
        }
    }
    let mut a = zeros4();
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = h[i][j] * c(0.0, -PI / 4.0);
        }
    }
    expm(&a)
}

fn embed(wire: Wire, g: &Matrix2) -> [[Complex; 4]; 4] {
    match wire {
        Wire::Interferometer => tensor(g, &Matrix2::identity()).0,
        Wire::Detector => tensor(&Matrix2::identity(), g).0,
        Wire::Both => unreachable!(),
    }
}

/// Probabilities from multiplying the full 4×4 gate chain of the physical
/// circuit.
pub fn chain_probabilities(cfg: &CircuitConfig) -> [f64; 4] {
    let mut u = zeros4();
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    for (wire, gate) in physical_circuit(cfg) {
        let m = match wire {
            Wire::Both => gate.two().unwrap().matrix().0,
            w => embed(w, &gate.single().unwrap()),
        };
        u = matmul(&m, &u);
    }
    std::array::from_fn(|k| u[k][0].norm_sqr())
}

/// Probabilities of `(|0⟩|δ₀⟩ + e^{iφ}|1⟩|δ₁⟩)/√2` read out through
/// `P_i† ⊗ P_d†`.
pub fn abstract_probabilities(family: CircuitFamily, phi: f64, alpha: f64) -> [f64; 4] {
    let s = FRAC_1_SQRT_2;
    let d0 = [c(s, 0.0), c(s, 0.0)];
    let d1 = [c(s, 0.0), Complex::from_polar(s, alpha)];
    let e = Complex::from_polar(s, phi);
    let psi = [d0[0] * s, d0[1] * s, e * d1[0], e * d1[1]];
    let h = [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]];
    let id = pauli('I');
    let w = Complex::from_polar(1.0, -alpha / 2.0) * c(0.0, 1.0);
    let o_dag = [[c(s, 0.0), w * s], [c(s, 0.0), -w * s]];
    let (pi, pd) = match family {
        CircuitFamily::WpX => (h, o_dag),
        CircuitFamily::WpZ => (id, o_dag),
        CircuitFamily::EraserX => (h, id),
        CircuitFamily::EraserZ => (id, id),
        CircuitFamily::Mzi => panic!("single-qubit family has no two-qubit oracle"),
    };
    let u = tensor(&Matrix2::new(pi), &Matrix2::new(pd)).0;
    std::array::from_fn(|r| (0..4).map(|k| u[r][k] * psi[k]).sum::<Complex>().norm_sqr())
}

pub fn matrix4(m: [[Complex; 4]; 4]) -> Matrix4 {
    Matrix4::new(m)
}

/// SQGE-only closed forms.
pub mod sqge {
    pub fn d(t: &[f64; 5], alpha: f64) -> f64 {
        ((t[2] + t[3]).cos().powi(2) * (alpha / 2.0 - t[4]).sin().powi(2)).sqrt()
    }
    pub fn x(t: &[f64; 5], phi: f64, alpha: f64) -> f64 {
        let s = t[0] + t[1];
        0.5 * ((alpha + phi + s - t[4]).cos() + (phi + s + t[4]).cos())
    }
    pub fn x0(t: &[f64; 5], phi: f64) -> f64 {
        (phi + t[0] + t[1] + t[4]).cos()
    }
    pub fn x1(t: &[f64; 5], phi: f64, alpha: f64) -> f64 {
        (alpha + phi + t[0] + t[1] - t[4]).cos()
    }
}

/// First-order expansions in the biases of the biased CNOT.
pub mod first_order {
    use std::f64::consts::FRAC_PI_2;

    fn s(b: &[f64; 5]) -> f64 {
        b[0] + b[1] + b[3] + b[4]
    }
    pub fn d(b: &[f64; 5], alpha: f64) -> f64 {
        (alpha / 2.0).sin() - s(b) * (alpha / 2.0).cos()
    }
    pub fn x(b: &[f64; 5], phi: f64, alpha: f64) -> f64 {
        ((1.0 + b[1] - b[3]) * phi.cos() + (1.0 - b[1] + b[3]) * (alpha + phi).cos()) / 2.0
            - s(b) / 2.0 * (phi.sin() - (alpha + phi).sin())
    }
    pub fn x0(b: &[f64; 5], phi: f64, alpha: f64) -> f64 {
        phi.cos() + phi.sin() * ((b[0] - b[4]) * (alpha / 2.0).sin() - s(b))
    }
    pub fn x1(b: &[f64; 5], phi: f64, alpha: f64) -> f64 {
        (alpha + phi).cos() + (alpha + phi).sin() * ((b[0] - b[4]) * (alpha / 2.0).sin() + s(b))
    }
    pub fn dm(b: &[f64; 5], alpha: f64) -> f64 {
        -b[0] + b[4] + (b[1] - b[3]) * (alpha / 2.0).cos() - FRAC_PI_2 * b[2] * (alpha / 2.0).sin()
    }
}

/// Deterministic uniform draws on `[lo, hi]` for test loops.
pub fn uniform_draws(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}
