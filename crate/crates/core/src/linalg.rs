//! Dense complex algebra for one and two qubits.
//!
//! Two-qubit objects use the basis `|xy⟩ = |x⟩ᵢ ⊗ |y⟩_d` with flat index
//! `2x + y`: the first tensor factor is the interferometer qubit, the second
//! the detector.

use std::fmt;
use std::ops::Mul;

use thiserror::Error;

/// Complex amplitude type used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Maximum entrywise deviation of `U†U` from the identity accepted for a
/// matrix tagged unitary.
pub const UNITARY_TOL: f64 = 1e-12;

/// Maximum deviation of `Σ|amp|²` from one accepted for a state vector.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not unitary: max |U†U - I| = {deviation:e}")]
    NonUnitary { deviation: f64 },
    #[error("state is not normalized: |norm² - 1| = {deviation:e}")]
    NotNormalized { deviation: f64 },
    #[error("non-finite entry produced")]
    NonFinite,
}

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[Complex; 2]; 2]);

/// Row-major 4×4 complex matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex; 4]; 4]);

impl Matrix2 {
    pub const fn new(rows: [[Complex; 2]; 2]) -> Self {
        Matrix2(rows)
    }

    pub const fn identity() -> Self {
        Matrix2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: Complex, b: Complex) -> Self {
        Matrix2([[a, ZERO], [ZERO, b]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn scale(&self, k: Complex) -> Self {
        let mut out = self.0;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        Matrix2(out)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Matrix2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        let mut d = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Max entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Matrix2::identity())
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() < UNITARY_TOL
    }

    pub fn apply(&self, v: [Complex; 2]) -> [Complex; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Matrix2(out)
    }
}

impl Matrix4 {
    pub const fn new(rows: [[Complex; 4]; 4]) -> Self {
        Matrix4(rows)
    }

    pub fn identity() -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Matrix4(out)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn scale(&self, k: Complex) -> Self {
        let mut out = self.0;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        Matrix4(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.0[c][r].conj();
            }
        }
        Matrix4(out)
    }

    pub fn max_abs_diff(&self, other: &Matrix4) -> f64 {
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Max entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Matrix4::identity())
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() < UNITARY_TOL
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn apply_raw(&self, v: &[Complex; 4]) -> [Complex; 4] {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.0[r];
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c] + a[r][3] * b[3][c];
            }
        }
        Matrix4(out)
    }
}

impl fmt::Debug for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Debug for Matrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Kronecker product `a ⊗ b`; `a` acts on the interferometer qubit.
pub fn tensor(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            for xp in 0..2 {
                for yp in 0..2 {
                    out[2 * x + y][2 * xp + yp] = a.0[x][xp] * b.0[y][yp];
                }
            }
        }
    }
    Matrix4(out)
}

/// A 4×4 matrix that passed the unitarity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4(Matrix4);

impl Unitary4 {
    pub fn new(m: Matrix4) -> Result<Self, LinalgError> {
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let deviation = m.unitarity_deviation();
        if deviation < UNITARY_TOL {
            Ok(Unitary4(m))
        } else {
            Err(LinalgError::NonUnitary { deviation })
        }
    }

    /// Wraps a matrix that is unitary by construction. Debug builds still check.
    pub(crate) fn trusted(m: Matrix4) -> Self {
        debug_assert!(m.unitarity_deviation() < 1e-10, "trusted matrix is not unitary: {m:?}");
        Unitary4(m)
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4 {
        self.0
    }

    pub fn identity() -> Self {
        Unitary4(Matrix4::identity())
    }

    pub fn local(a: &Matrix2, b: &Matrix2) -> Result<Self, LinalgError> {
        Unitary4::new(tensor(a, b))
    }
}

impl Mul for Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

/// Normalized two-qubit pure state, amplitudes ordered `|00⟩,|01⟩,|10⟩,|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector4([Complex; 4]);

impl StateVector4 {
    pub fn new(amps: [Complex; 4]) -> Result<Self, LinalgError> {
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(LinalgError::NonFinite);
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (norm2 - 1.0).abs();
        if deviation < NORM_TOL {
            Ok(StateVector4(amps))
        } else {
            Err(LinalgError::NotNormalized { deviation })
        }
    }

    /// Computational basis state `|xy⟩` given its flat index `2x + y`.
    pub fn basis(index: usize) -> Self {
        assert!(index < 4, "basis index out of range: {index}");
        let mut amps = [ZERO; 4];
        amps[index] = ONE;
        StateVector4(amps)
    }

    pub fn amplitudes(&self) -> &[Complex; 4] {
        &self.0
    }

    pub fn amplitude(&self, index: usize) -> Complex {
        self.0[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a single-qubit gate to the interferometer qubit.
    pub fn apply_first(&self, g: &Matrix2) -> Self {
        let a = &self.0;
        let m = &g.0;
        StateVector4([
            m[0][0] * a[0] + m[0][1] * a[2],
            m[0][0] * a[1] + m[0][1] * a[3],
            m[1][0] * a[0] + m[1][1] * a[2],
            m[1][0] * a[1] + m[1][1] * a[3],
        ])
    }

    /// Applies a single-qubit gate to the detector qubit.
    pub fn apply_second(&self, g: &Matrix2) -> Self {
        let a = &self.0;
        let m = &g.0;
        StateVector4([
            m[0][0] * a[0] + m[0][1] * a[1],
            m[1][0] * a[0] + m[1][1] * a[1],
            m[0][0] * a[2] + m[0][1] * a[3],
            m[1][0] * a[2] + m[1][1] * a[3],
        ])
    }

    /// Concurrence `2|a₀₀a₁₁ − a₀₁a₁₀|` of the pure state.
    pub fn concurrence(&self) -> f64 {
        let a = &self.0;
        2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
    }
}

/// Applies a unitary to a state.
pub fn apply(u: &Unitary4, s: &StateVector4) -> StateVector4 {
    StateVector4(u.0.apply_raw(&s.0))
}

/// Applies an untagged matrix after checking unitarity.
pub fn apply_checked(u: &Matrix4, s: &StateVector4) -> Result<StateVector4, LinalgError> {
    let u = Unitary4::new(*u)?;
    Ok(apply(&u, s))
}

/// Outcome probabilities `p(xy) = |⟨xy|s⟩|²`.
pub fn probabilities(s: &StateVector4) -> [f64; 4] {
    let mut p = [0.0; 4];
    for (pi, a) in p.iter_mut().zip(s.0.iter()) {
        *pi = a.norm_sqr();
    }
    p
}
