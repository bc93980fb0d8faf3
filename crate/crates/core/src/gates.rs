//! Gate library: native single-qubit gates, their angle-biased variants, the
//! ideal CNOT, the ZX entangler and the biased-CNOT family built from the
//! echoed cross-resonance effective Hamiltonian.
//!
//! Every two-qubit matrix uses control = interferometer qubit (first factor),
//! target = detector qubit, index `2c + t`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::linalg::{tensor, Complex, Matrix2, Matrix4, Unitary4};

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

#[inline]
fn cis(angle: f64) -> Complex {
    Complex::from_polar(1.0, angle)
}

/// `U₁(y) = diag(1, e^{iy})`.
pub fn u1(y: f64) -> Matrix2 {
    Matrix2::diag(ONE, cis(y))
}

/// `U₂(x, y) = 1/√2 [[1, −e^{iy}], [e^{ix}, e^{i(x+y)}]]`.
pub fn u2(x: f64, y: f64) -> Matrix2 {
    let s = Complex::new(FRAC_1_SQRT_2, 0.0);
    Matrix2::new([[s, -s * cis(y)], [s * cis(x), s * cis(x + y)]])
}

pub fn hadamard() -> Matrix2 {
    let s = Complex::new(FRAC_1_SQRT_2, 0.0);
    Matrix2::new([[s, s], [s, -s]])
}

pub fn pauli_x() -> Matrix2 {
    Matrix2::new([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> Matrix2 {
    Matrix2::new([[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> Matrix2 {
    Matrix2::diag(ONE, -ONE)
}

/// `S† = diag(1, −i)`.
pub fn s_dagger() -> Matrix2 {
    Matrix2::diag(ONE, -I)
}

/// `R_x(θ) = exp(−iθX/2)`.
pub fn rx(theta: f64) -> Matrix2 {
    let c = Complex::new((theta / 2.0).cos(), 0.0);
    let s = Complex::new(0.0, -(theta / 2.0).sin());
    Matrix2::new([[c, s], [s, c]])
}

/// Optimal which-path readout rotation `O_α†` for detector states
/// `(|0⟩+|1⟩)/√2` and `(|0⟩+e^{iα}|1⟩)/√2`.
pub fn optimal_readout(alpha: f64) -> Matrix2 {
    let s = Complex::new(FRAC_1_SQRT_2, 0.0);
    let w = I * cis(-alpha / 2.0);
    Matrix2::new([[s, s * w], [s, -s * w]])
}

pub fn cnot() -> Unitary4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[1][1] = ONE;
    m[2][3] = ONE;
    m[3][2] = ONE;
    Unitary4::trusted(Matrix4::new(m))
}

/// `U_ZX(θ) = exp(−i θ/2 Z⊗X)`.
pub fn u_zx(theta: f64) -> Unitary4 {
    let c = Complex::new((theta / 2.0).cos(), 0.0);
    let s = Complex::new(0.0, -(theta / 2.0).sin());
    let mut m = [[ZERO; 4]; 4];
    // control 0 block: cos − i sin X ; control 1 block: cos + i sin X
    m[0][0] = c;
    m[1][1] = c;
    m[0][1] = s;
    m[1][0] = s;
    m[2][2] = c;
    m[3][3] = c;
    m[2][3] = -s;
    m[3][2] = -s;
    Unitary4::trusted(Matrix4::new(m))
}

/// Local correction `M = S† ⊗ R_x(−π/2)` with `CNOT = U_ZX(π/2)·M`.
pub fn local_correction() -> Unitary4 {
    Unitary4::trusted(tensor(&s_dagger(), &rx(-FRAC_PI_2)))
}

/// Angle biases `θ₁..θ₅` of the native single-qubit gates.
///
/// `θ₁, θ₂` shift the two angles of every `U₂` on the interferometer qubit,
/// `θ₃, θ₄` those of every `U₂` on the detector, `θ₅` the angle of every `U₁`
/// on the detector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SqgeParams {
    pub theta: [f64; 5],
}

/// Fitting bound on each `|θ_k|`.
pub const SQGE_BOUND: f64 = PI / 10.0;

impl SqgeParams {
    pub const ZERO: SqgeParams = SqgeParams { theta: [0.0; 5] };

    pub fn new(theta: [f64; 5]) -> Self {
        SqgeParams { theta }
    }

    pub fn is_zero(&self) -> bool {
        self.theta.iter().all(|&t| t == 0.0)
    }

    pub fn within_fit_bounds(&self) -> bool {
        self.theta.iter().all(|t| t.abs() <= SQGE_BOUND)
    }

    /// `U₂(x+θ₁, y+θ₂)` on the interferometer qubit.
    pub fn u2_interferometer(&self, x: f64, y: f64) -> Matrix2 {
        u2(x + self.theta[0], y + self.theta[1])
    }

    /// `U₂(x+θ₃, y+θ₄)` on the detector qubit.
    pub fn u2_detector(&self, x: f64, y: f64) -> Matrix2 {
        u2(x + self.theta[2], y + self.theta[3])
    }

    /// `U₁(y+θ₅)` on the detector qubit.
    pub fn u1_detector(&self, y: f64) -> Matrix2 {
        u1(y + self.theta[4])
    }
}

/// Bias ratios `β₁..β₅` of the `IY, IZ, IX, ZY, ZZ` error terms relative to
/// the `ZX` coupling.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BiasParams {
    pub beta: [f64; 5],
}

/// Fitting bound on each `|β_j|`.
pub const BIAS_BOUND: f64 = 0.5;

impl BiasParams {
    pub const ZERO: BiasParams = BiasParams { beta: [0.0; 5] };

    pub fn new(beta: [f64; 5]) -> Self {
        BiasParams { beta }
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.0)
    }

    pub fn within_fit_bounds(&self) -> bool {
        self.beta.iter().all(|b| b.abs() <= BIAS_BOUND)
    }

    /// Keeps only the echo-sequence terms `β₁, β₂`.
    pub fn truncated(&self, terms: BiasTerms) -> Self {
        match terms {
            BiasTerms::Five => *self,
            BiasTerms::Two => BiasParams::new([self.beta[0], self.beta[1], 0.0, 0.0, 0.0]),
        }
    }

    /// Reparametrization relating the swapped operator orderings to the
    /// plain one: `β₁→β₂, β₂→−β₁, β₃→β₃, β₄→β₅, β₅→−β₄`.
    pub fn reordering_map(&self) -> Self {
        let [b1, b2, b3, b4, b5] = self.beta;
        BiasParams::new([b2, -b1, b3, b5, -b4])
    }

    /// `γ_c` for control value `c ∈ {0, 1}`.
    pub fn gamma(&self, c: usize) -> f64 {
        let [b1, b2, b3, b4, b5] = self.beta;
        let s = sign(c);
        ((b1 + s * b4).powi(2) + (b2 + s * b5).powi(2) + (b3 + s).powi(2)).sqrt()
    }
}

#[inline]
fn sign(bit: usize) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Which error Hamiltonian terms a biased CNOT carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasTerms {
    /// `IY, IZ` only.
    Two,
    /// `IY, IZ, IX, ZY, ZZ`.
    #[default]
    Five,
}

/// Placement of the local correction relative to the biased entangler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcnotOrdering {
    /// `U_eff · M`
    #[default]
    Plain,
    /// `M · U_eff`
    Primed,
    /// `(S†⊗1) · U_eff · (1⊗R_x(−π/2))`
    DoublePrimed,
    /// `(1⊗R_x(−π/2)) · U_eff · (S†⊗1)`
    TriplePrimed,
}

impl BcnotOrdering {
    pub const ALL: [BcnotOrdering; 4] =
        [BcnotOrdering::Plain, BcnotOrdering::Primed, BcnotOrdering::DoublePrimed, BcnotOrdering::TriplePrimed];
}

/// `sin(γπ/4)/γ`, finite as `γ → 0`.
fn sinc_quarter_pi(gamma: f64) -> f64 {
    if gamma.abs() < 1e-8 {
        FRAC_PI_4
    } else {
        (gamma * FRAC_PI_4).sin() / gamma
    }
}

/// Time evolution under the biased effective CR Hamiltonian for the duration
/// of an ideal `π/2` ZX rotation, from its closed-form entries.
pub fn u_eff(b: &BiasParams) -> Unitary4 {
    let [b1, b2, b3, b4, b5] = b.beta;
    let mut m = [[ZERO; 4]; 4];
    for c in 0..2 {
        let s = sign(c);
        let g = b.gamma(c);
        let cg = (g * FRAC_PI_4).cos();
        let sg = sinc_quarter_pi(g);
        for cp in 0..2 {
            let block = ((c + cp) as f64 - 1.0).powi(2);
            if block == 0.0 {
                continue;
            }
            for t in 0..2 {
                for tp in 0..2 {
                    let tt = t as f64 + tp as f64 - 1.0;
                    let flip = t as f64 + tp as f64 - 2.0 * (t * tp) as f64;
                    let v = cg * tt * tt
                        + sg * (I * tt * (b2 + s * b5)
                            - flip * (I * (b3 + s) + sign(tp) * (b1 + s * b4)));
                    m[2 * cp + tp][2 * c + t] = block * v;
                }
            }
        }
    }
    Unitary4::trusted(Matrix4::new(m))
}

/// Closed-form entries of `BCNOT₅ = U_eff(B)·M`.
pub fn bcnot5_closed_form(b: &BiasParams) -> Unitary4 {
    let [b1, b2, b3, b4, b5] = b.beta;
    let one_i = Complex::new(1.0, 1.0);
    let i_minus_one = Complex::new(-1.0, 1.0);
    let mut m = [[ZERO; 4]; 4];
    for c in 0..2 {
        let s = sign(c);
        let g = b.gamma(c);
        let cg = (g * FRAC_PI_4).cos();
        let sg = sinc_quarter_pi(g);
        let cf = c as f64;
        for cp in 0..2 {
            let cpf = cp as f64;
            let prefactor = (I * (cpf - 1.0) - cf * cpf * one_i + I * cf) * FRAC_1_SQRT_2;
            for t in 0..2 {
                let tf = t as f64;
                for tp in 0..2 {
                    let tpf = tp as f64;
                    let even = tf * one_i * (2.0 * tpf - 1.0) - one_i * tpf + I;
                    let odd = b1 + b2 + I * b3 + s * (b4 + b5 + I)
                        + tf * one_i
                            * (-b1 + I * (b2 + b3 * (2.0 * tpf - 1.0) + s * (I * b4 + b5 + 2.0 * tpf - 1.0)))
                        + tpf * i_minus_one * (b1 + I * b2 - b3 + s * (b4 + I * b5 - 1.0));
                    m[2 * cp + tp][2 * c + t] = prefactor * (cg * even + sg * odd);
                }
            }
        }
    }
    Unitary4::trusted(Matrix4::new(m))
}

/// Biased CNOT for the given error terms and operator ordering.
pub fn bcnot(b: &BiasParams, ordering: BcnotOrdering, terms: BiasTerms) -> Unitary4 {
    let b = b.truncated(terms);
    match ordering {
        BcnotOrdering::Plain => bcnot5_closed_form(&b),
        BcnotOrdering::Primed => local_correction() * u_eff(&b),
        BcnotOrdering::DoublePrimed => {
            let left = Unitary4::trusted(tensor(&s_dagger(), &Matrix2::identity()));
            let right = Unitary4::trusted(tensor(&Matrix2::identity(), &rx(-FRAC_PI_2)));
            left * u_eff(&b) * right
        }
        BcnotOrdering::TriplePrimed => {
            let left = Unitary4::trusted(tensor(&Matrix2::identity(), &rx(-FRAC_PI_2)));
            let right = Unitary4::trusted(tensor(&s_dagger(), &Matrix2::identity()));
            left * u_eff(&b) * right
        }
    }
}

/// Tagged description of a native or modeled gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateSpec {
    U1 { y: f64 },
    U2 { x: f64, y: f64 },
    Cnot,
    Zx { theta: f64 },
    Bcnot { bias: BiasParams, ordering: BcnotOrdering, terms: BiasTerms },
}

impl GateSpec {
    pub fn qubits(&self) -> usize {
        match self {
            GateSpec::U1 { .. } | GateSpec::U2 { .. } => 1,
            _ => 2,
        }
    }

    /// Matrix of a single-qubit gate, `None` for two-qubit gates.
    pub fn single(&self) -> Option<Matrix2> {
        match *self {
            GateSpec::U1 { y } => Some(u1(y)),
            GateSpec::U2 { x, y } => Some(u2(x, y)),
            _ => None,
        }
    }

    /// Matrix of a two-qubit gate, `None` for single-qubit gates.
    pub fn two(&self) -> Option<Unitary4> {
        match *self {
            GateSpec::Cnot => Some(cnot()),
            GateSpec::Zx { theta } => Some(u_zx(theta)),
            GateSpec::Bcnot { bias, ordering, terms } => Some(bcnot(&bias, ordering, terms)),
            _ => None,
        }
    }
}
