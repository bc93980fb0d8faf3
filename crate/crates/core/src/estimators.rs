//! Point estimates and standard errors of the which-path observables from
//! shot counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::Observable;
use crate::noise::OutcomeCounts;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EstimateError {
    #[error("need at least 2 shots, got {shots}")]
    InsufficientShots { shots: u64 },
    #[error("conditioning frequency is zero")]
    DegenerateCondition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub shots: u64,
}

/// An estimate located on the `(φ, α)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub phi: f64,
    pub alpha: f64,
    /// Position of the point in the execution sequence.
    pub exec_order: usize,
    pub estimate: Estimate,
}

fn check_shots(shots: u64) -> Result<f64, EstimateError> {
    if shots < 2 {
        return Err(EstimateError::InsufficientShots { shots });
    }
    Ok(shots as f64)
}

/// `X̄ = p̄(0) − p̄(1)` on the interferometer marginal, `σ = s/√S` with the
/// unbiased sample variance `s² = S/(S−1)·(1 − X̄²)`.
pub fn x_from_frequencies(f: &[f64; 4], shots: u64) -> Result<Estimate, EstimateError> {
    let s = check_shots(shots)?;
    let x = f[0] + f[1] - f[2] - f[3];
    let var = (s / (s - 1.0)) * (1.0 - x * x).max(0.0);
    Ok(Estimate { value: x, std_error: (var / s).sqrt(), shots })
}

/// `𝒟̄ = p̄(00)/(p̄(00)+p̄(01)) + p̄(11)/(p̄(10)+p̄(11)) − 1`.
pub fn d_from_frequencies(f: &[f64; 4], shots: u64) -> Result<Estimate, EstimateError> {
    let s = check_shots(shots)?;
    let n0 = f[0] + f[1];
    let n1 = f[2] + f[3];
    if n0 <= 0.0 || n1 <= 0.0 {
        return Err(EstimateError::DegenerateCondition);
    }
    let value = f[0] / n0 + f[3] / n1 - 1.0;
    let var = f[0] * f[1] / (s * n0.powi(3)) + f[2] * f[3] / (s * n1.powi(3));
    Ok(Estimate { value, std_error: var.sqrt(), shots })
}

/// `X̄_y = (p̄(0y) − p̄(1y)) / (p̄(0y) + p̄(1y))`.
pub fn conditional_x_from_frequencies(f: &[f64; 4], shots: u64, y: usize) -> Result<Estimate, EstimateError> {
    assert!(y < 2, "detector outcome must be 0 or 1");
    let s = check_shots(shots)?;
    let (a, b) = (f[y], f[2 + y]);
    let n = a + b;
    if n <= 0.0 {
        return Err(EstimateError::DegenerateCondition);
    }
    let var = 4.0 * a * b / (s * n.powi(3));
    Ok(Estimate { value: (a - b) / n, std_error: var.sqrt(), shots })
}

pub fn estimate_x(c: &OutcomeCounts) -> Result<Estimate, EstimateError> {
    x_from_frequencies(&c.frequencies(), c.shots)
}

pub fn estimate_d(c: &OutcomeCounts) -> Result<Estimate, EstimateError> {
    check_shots(c.shots)?;
    d_from_frequencies(&c.frequencies(), c.shots)
}

pub fn estimate_conditional_x(c: &OutcomeCounts, y: usize) -> Result<Estimate, EstimateError> {
    check_shots(c.shots)?;
    conditional_x_from_frequencies(&c.frequencies(), c.shots, y)
}

pub fn estimate(observable: Observable, c: &OutcomeCounts) -> Result<Estimate, EstimateError> {
    estimate_frequencies(observable, &c.frequencies(), c.shots)
}

pub fn estimate_frequencies(observable: Observable, f: &[f64; 4], shots: u64) -> Result<Estimate, EstimateError> {
    match observable {
        Observable::X => x_from_frequencies(f, shots),
        Observable::X0 => conditional_x_from_frequencies(f, shots, 0),
        Observable::X1 => conditional_x_from_frequencies(f, shots, 1),
        Observable::D | Observable::Dm => d_from_frequencies(f, shots),
    }
}
