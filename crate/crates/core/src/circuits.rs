//! Physical which-path circuits over the native gate set and the observables
//! derived from their exact output distributions.
//!
//! The two-qubit circuit is
//!
//! ```text
//! q_i: U₂(φ+α/2, π) ──●────────────●── G_i
//! q_d: U₂(0, π) ──────⊕── U₁(−α/2) ─⊕── G_d
//! ```
//!
//! i.e. the controlled phase `CR_α` decomposed with its leading `U₁(α/2)`
//! merged into the interferometer preparation. `G_i` is `U₂(0, π)` for an
//! X-basis readout of `q_i` and nothing for a Z-basis readout. `G_d` is
//! `U₂(0, 3π/2)` for the optimal which-path basis and `U₁(α/2)` for the
//! erasing Z basis. The single-qubit interferometer is `U₂(φ, π)` followed by
//! `U₂(0, π)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{self, BcnotOrdering, BiasParams, BiasTerms, GateSpec, SqgeParams};
use crate::linalg::{apply, probabilities, Matrix2, StateVector4, Unitary4};

/// Conditioning probabilities below this are treated as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Offset along φ used to take the two-sided limit at a degenerate point.
const LIMIT_STEP: f64 = 1e-4;

/// Minimum φ-grid size accepted by [`visibility_scan`].
pub const MIN_VISIBILITY_GRID: usize = 101;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("observable {observable:?} is not available from circuit family {family:?}")]
    WrongFamily { family: CircuitFamily, observable: Observable },
    #[error("conditioning probability vanishes (value is 0/0)")]
    DegenerateCondition,
    #[error("phase grid must cover [0, 2π] with at least {MIN_VISIBILITY_GRID} points, got {points}")]
    GridTooCoarse { points: usize },
}

/// Readout configuration of the which-path circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitFamily {
    /// `q_i` in X, `q_d` in the optimal basis.
    WpX,
    /// `q_i` in Z, `q_d` in the optimal basis.
    WpZ,
    /// `q_i` in X, `q_d` in Z.
    EraserX,
    /// `q_i` in Z, `q_d` in Z.
    EraserZ,
    /// Single-qubit Mach-Zehnder interferometer.
    Mzi,
}

impl CircuitFamily {
    pub const ALL: [CircuitFamily; 5] =
        [CircuitFamily::WpX, CircuitFamily::WpZ, CircuitFamily::EraserX, CircuitFamily::EraserZ, CircuitFamily::Mzi];

    fn interferometer_in_x(self) -> bool {
        matches!(self, CircuitFamily::WpX | CircuitFamily::EraserX | CircuitFamily::Mzi)
    }

    fn detector_optimal(self) -> bool {
        matches!(self, CircuitFamily::WpX | CircuitFamily::WpZ)
    }

    /// Observables estimable from this family's counts.
    pub fn observables(self) -> &'static [Observable] {
        match self {
            CircuitFamily::WpX | CircuitFamily::Mzi => &[Observable::X],
            CircuitFamily::WpZ => &[Observable::D],
            CircuitFamily::EraserX => &[Observable::X, Observable::X0, Observable::X1],
            CircuitFamily::EraserZ => &[Observable::Dm],
        }
    }
}

/// Scalar observables of the which-path experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    /// Interference contrast `⟨X⟩` on `q_i`.
    X,
    /// `⟨X⟩` conditioned on detector outcome 0.
    X0,
    /// `⟨X⟩` conditioned on detector outcome 1.
    X1,
    /// Distinguishability from the optimal detector readout.
    D,
    /// Measured distinguishability with the Z-basis detector readout.
    Dm,
}

impl Observable {
    pub const ALL: [Observable; 5] = [Observable::X, Observable::X0, Observable::X1, Observable::D, Observable::Dm];

    pub fn name(self) -> &'static str {
        match self {
            Observable::X => "X",
            Observable::X0 => "X0",
            Observable::X1 => "X1",
            Observable::D => "D",
            Observable::Dm => "Dm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Observable::ALL.into_iter().find(|o| o.name().eq_ignore_ascii_case(s))
    }

    pub fn available_from(self, family: CircuitFamily) -> bool {
        family.observables().contains(&self)
    }
}

/// Model of the two CNOTs in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Entangler {
    #[default]
    Cnot,
    Biased { bias: BiasParams, ordering: BcnotOrdering, terms: BiasTerms },
}

impl Entangler {
    pub fn biased(bias: BiasParams) -> Self {
        Entangler::Biased { bias, ordering: BcnotOrdering::Plain, terms: BiasTerms::Five }
    }

    pub fn gate(&self) -> GateSpec {
        match *self {
            Entangler::Cnot => GateSpec::Cnot,
            Entangler::Biased { bias, ordering, terms } => GateSpec::Bcnot { bias, ordering, terms },
        }
    }

    pub fn matrix(&self) -> Unitary4 {
        match self {
            Entangler::Cnot => gates::cnot(),
            Entangler::Biased { bias, ordering, terms } => gates::bcnot(bias, *ordering, *terms),
        }
    }
}

/// Gate-error model applied to every circuit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GateModel {
    #[serde(default)]
    pub sqge: SqgeParams,
    #[serde(default)]
    pub entangler: Entangler,
}

impl GateModel {
    pub const IDEAL: GateModel = GateModel { sqge: SqgeParams::ZERO, entangler: Entangler::Cnot };

    pub fn with_sqge(sqge: SqgeParams) -> Self {
        GateModel { sqge, entangler: Entangler::Cnot }
    }

    pub fn with_bias(bias: BiasParams) -> Self {
        GateModel { sqge: SqgeParams::ZERO, entangler: Entangler::biased(bias) }
    }
}

/// One circuit execution point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub family: CircuitFamily,
    pub phi: f64,
    pub alpha: f64,
    pub gates: GateModel,
}

impl CircuitConfig {
    pub fn ideal(family: CircuitFamily, phi: f64, alpha: f64) -> Self {
        CircuitConfig { family, phi, alpha, gates: GateModel::IDEAL }
    }
}

/// Which qubit a gate in the physical sequence acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wire {
    Interferometer,
    Detector,
    Both,
}

/// Gate sequence of the physical circuit, in execution order.
pub fn physical_circuit(c: &CircuitConfig) -> Vec<(Wire, GateSpec)> {
    let th = c.gates.sqge.theta;
    let u2i = |x: f64, y: f64| GateSpec::U2 { x: x + th[0], y: y + th[1] };
    let u2d = |x: f64, y: f64| GateSpec::U2 { x: x + th[2], y: y + th[3] };
    let u1d = |y: f64| GateSpec::U1 { y: y + th[4] };
    if c.family == CircuitFamily::Mzi {
        return vec![(Wire::Interferometer, u2i(c.phi, PI)), (Wire::Interferometer, u2i(0.0, PI))];
    }
    let entangler = c.gates.entangler.gate();
    let mut seq = vec![
        (Wire::Interferometer, u2i(c.phi + c.alpha / 2.0, PI)),
        (Wire::Detector, u2d(0.0, PI)),
        (Wire::Both, entangler),
        (Wire::Detector, u1d(-c.alpha / 2.0)),
        (Wire::Both, entangler),
    ];
    if c.family.interferometer_in_x() {
        seq.push((Wire::Interferometer, u2i(0.0, PI)));
    }
    if c.family.detector_optimal() {
        seq.push((Wire::Detector, u2d(0.0, 1.5 * PI)));
    } else {
        seq.push((Wire::Detector, u1d(c.alpha / 2.0)));
    }
    seq
}

/// Evaluates circuits of every family for a fixed gate model.
///
/// The entangler matrix is built once, so repeated evaluation over a
/// `(φ, α)` grid only rebuilds the phase-dependent single-qubit gates.
#[derive(Debug, Clone)]
pub struct Simulator {
    sqge: SqgeParams,
    entangler: Unitary4,
}

impl Simulator {
    pub fn new(model: &GateModel) -> Self {
        Simulator { sqge: model.sqge, entangler: model.entangler.matrix() }
    }

    pub fn state(&self, family: CircuitFamily, phi: f64, alpha: f64) -> StateVector4 {
        let t = &self.sqge;
        let s = StateVector4::basis(0);
        if family == CircuitFamily::Mzi {
            return s.apply_first(&t.u2_interferometer(phi, PI)).apply_first(&t.u2_interferometer(0.0, PI));
        }
        let mut s = s
            .apply_first(&t.u2_interferometer(phi + alpha / 2.0, PI))
            .apply_second(&t.u2_detector(0.0, PI));
        s = apply(&self.entangler, &s);
        s = s.apply_second(&t.u1_detector(-alpha / 2.0));
        s = apply(&self.entangler, &s);
        if family.interferometer_in_x() {
            s = s.apply_first(&t.u2_interferometer(0.0, PI));
        }
        let gd: Matrix2 = if family.detector_optimal() {
            t.u2_detector(0.0, 1.5 * PI)
        } else {
            t.u1_detector(alpha / 2.0)
        };
        s.apply_second(&gd)
    }

    /// Exact `p(xy)`. The single-qubit family reports its outcome `x` as
    /// `|x0⟩`, leaving `p(01) = p(11) = 0`.
    pub fn probabilities(&self, family: CircuitFamily, phi: f64, alpha: f64) -> [f64; 4] {
        probabilities(&self.state(family, phi, alpha))
    }

    /// Exact value of `observable` at `(φ, α)`; degenerate conditioning is
    /// resolved by the two-sided limit along φ and flagged.
    pub fn observable(
        &self,
        family: CircuitFamily,
        observable: Observable,
        phi: f64,
        alpha: f64,
    ) -> Result<ObservableValue, CircuitError> {
        if !observable.available_from(family) {
            return Err(CircuitError::WrongFamily { family, observable });
        }
        let at = |p: f64| observable_from_probabilities(observable, &self.probabilities(family, p, alpha));
        match at(phi) {
            Ok(value) => Ok(ObservableValue { value, degenerate: false }),
            Err(CircuitError::DegenerateCondition) => {
                let value = two_sided_limit(at, phi)?;
                Ok(ObservableValue { value, degenerate: true })
            }
            Err(e) => Err(e),
        }
    }
}

/// Observable value with a flag marking a resolved 0/0 point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableValue {
    pub value: f64,
    pub degenerate: bool,
}

fn two_sided_limit<F>(f: F, phi: f64) -> Result<f64, CircuitError>
where
    F: Fn(f64) -> Result<f64, CircuitError>,
{
    let lo = f(phi - LIMIT_STEP)?;
    let hi = f(phi + LIMIT_STEP)?;
    Ok(0.5 * (lo + hi))
}

/// `⟨X⟩ = p(0·) − p(1·)` on the interferometer qubit.
pub fn x_from_probabilities(p: &[f64; 4]) -> f64 {
    p[0] + p[1] - p[2] - p[3]
}

/// `(p(0y) − p(1y)) / (p(0y) + p(1y))`.
pub fn conditional_x_from_probabilities(p: &[f64; 4], y: usize) -> Result<f64, CircuitError> {
    let (a, b) = (p[y], p[2 + y]);
    let norm = a + b;
    if norm < DEGENERATE_TOL {
        return Err(CircuitError::DegenerateCondition);
    }
    Ok((a - b) / norm)
}

/// `2 p_succ − 1` with `p_succ = ½ p(0_d|0_i) + ½ p(1_d|1_i)`.
pub fn distinguishability_from_probabilities(p: &[f64; 4]) -> Result<f64, CircuitError> {
    let n0 = p[0] + p[1];
    let n1 = p[2] + p[3];
    if n0 < DEGENERATE_TOL || n1 < DEGENERATE_TOL {
        return Err(CircuitError::DegenerateCondition);
    }
    Ok(p[0] / n0 + p[3] / n1 - 1.0)
}

pub fn observable_from_probabilities(observable: Observable, p: &[f64; 4]) -> Result<f64, CircuitError> {
    match observable {
        Observable::X => Ok(x_from_probabilities(p)),
        Observable::X0 => conditional_x_from_probabilities(p, 0),
        Observable::X1 => conditional_x_from_probabilities(p, 1),
        Observable::D | Observable::Dm => distinguishability_from_probabilities(p),
    }
}

pub fn exact_probabilities(c: &CircuitConfig) -> [f64; 4] {
    Simulator::new(&c.gates).probabilities(c.family, c.phi, c.alpha)
}

/// `⟨X⟩` on the interferometer qubit.
pub fn expectation_x(c: &CircuitConfig) -> Result<f64, CircuitError> {
    if !Observable::X.available_from(c.family) {
        return Err(CircuitError::WrongFamily { family: c.family, observable: Observable::X });
    }
    Ok(x_from_probabilities(&exact_probabilities(c)))
}

/// `(⟨X₀⟩, ⟨X₁⟩)` from the eraser circuit.
pub fn conditional_x(c: &CircuitConfig) -> Result<(ObservableValue, ObservableValue), CircuitError> {
    let sim = Simulator::new(&c.gates);
    Ok((
        sim.observable(c.family, Observable::X0, c.phi, c.alpha)?,
        sim.observable(c.family, Observable::X1, c.phi, c.alpha)?,
    ))
}

/// `𝒟` (optimal readout) or `𝒟ₘ` (Z readout), depending on the family.
pub fn distinguishability(c: &CircuitConfig) -> Result<ObservableValue, CircuitError> {
    let observable = match c.family {
        CircuitFamily::WpZ => Observable::D,
        CircuitFamily::EraserZ => Observable::Dm,
        family => return Err(CircuitError::WrongFamily { family, observable: Observable::D }),
    };
    Simulator::new(&c.gates).observable(c.family, observable, c.phi, c.alpha)
}

/// Trace distance between the ideal detector states `|δ₀⟩`, `|δ₁⟩`.
pub fn trace_distance_d(alpha: f64) -> f64 {
    use crate::linalg::Complex;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d0 = [Complex::new(s, 0.0), Complex::new(s, 0.0)];
    let d1 = [Complex::new(s, 0.0), Complex::from_polar(s, alpha)];
    let overlap = d0[0].conj() * d1[0] + d0[1].conj() * d1[1];
    (1.0 - overlap.norm_sqr()).max(0.0).sqrt()
}

/// How a visibility is extracted from a curve sampled along φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMethod {
    /// Extrema of the sampled values.
    #[default]
    GridExtrema,
    /// Least-squares `c + a cos φ + b sin φ`, extrema `c ± √(a²+b²)`.
    Sinusoid,
    /// Grid extrema polished by golden-section search between neighbours.
    Refined,
}

/// `𝒱 = (max − min) / (2 + max + min)`.
pub fn visibility_from_extrema(max: f64, min: f64) -> f64 {
    (max - min) / (2.0 + max + min)
}

/// Least-squares fit of `c + a cos φ + b sin φ`; returns `(c, a, b)`.
pub fn fit_sinusoid(phis: &[f64], values: &[f64]) -> (f64, f64, f64) {
    use nalgebra::{Matrix3, Vector3};
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for (&p, &v) in phis.iter().zip(values) {
        let row = Vector3::new(1.0, p.cos(), p.sin());
        ata += row * row.transpose();
        atb += row * v;
    }
    let sol = ata.lu().solve(&atb).unwrap_or_else(Vector3::zeros);
    (sol[0], sol[1], sol[2])
}

/// Visibility of sampled values along φ by the sinusoid route.
pub fn sinusoid_visibility(phis: &[f64], values: &[f64]) -> f64 {
    let (c, a, b) = fit_sinusoid(phis, values);
    let r = a.hypot(b);
    visibility_from_extrema(c + r, c - r)
}

/// Visibility of sampled values along φ by the grid-extrema route.
pub fn grid_visibility(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    visibility_from_extrema(max, min)
}

fn check_grid(phis: &[f64]) -> Result<(), CircuitError> {
    let covers = phis.first().is_some_and(|&a| a <= 1e-12) && phis.last().is_some_and(|&b| b >= TAU - 1e-12);
    if phis.len() < MIN_VISIBILITY_GRID || !covers {
        return Err(CircuitError::GridTooCoarse { points: phis.len() });
    }
    Ok(())
}

/// `n` evenly spaced points on `[start, end]`, endpoints included.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n).map(|k| start + (end - start) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Visibility of `observable` as φ sweeps `phis` at fixed α.
pub fn visibility_scan(
    model: &GateModel,
    family: CircuitFamily,
    observable: Observable,
    alpha: f64,
    phis: &[f64],
    method: VisibilityMethod,
) -> Result<f64, CircuitError> {
    check_grid(phis)?;
    let sim = Simulator::new(model);
    let eval = |phi: f64| sim.observable(family, observable, phi, alpha).map(|v| v.value);
    let values = phis.iter().map(|&p| eval(p)).collect::<Result<Vec<_>, _>>()?;
    match method {
        VisibilityMethod::GridExtrema => Ok(grid_visibility(&values)),
        VisibilityMethod::Sinusoid => Ok(sinusoid_visibility(phis, &values)),
        VisibilityMethod::Refined => {
            let (imax, imin) = extrema_indices(&values);
            let max = polish(&eval, phis, imax, 1.0)?;
            let min = -polish(&eval, phis, imin, -1.0)?;
            Ok(visibility_from_extrema(max.max(values[imax]), min.min(values[imin])))
        }
    }
}

fn extrema_indices(values: &[f64]) -> (usize, usize) {
    let mut imax = 0;
    let mut imin = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[imax] {
            imax = i;
        }
        if v < values[imin] {
            imin = i;
        }
    }
    (imax, imin)
}

/// Golden-section maximization of `sign·f` on the cell around `phis[i]`.
fn polish<F>(f: &F, phis: &[f64], i: usize, sign: f64) -> Result<f64, CircuitError>
where
    F: Fn(f64) -> Result<f64, CircuitError>,
{
    let step = phis[1] - phis[0];
    let (mut a, mut b) = (phis[i] - step, phis[i] + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * f(d)?;
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    Ok(fc.max(fd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn ideal(family: CircuitFamily, phi: f64, alpha: f64) -> CircuitConfig {
        CircuitConfig::ideal(family, phi, alpha)
    }

    #[test]
    fn eraser_probabilities_at_phi_zero() {
        for &a in &[0.0, 0.9, PI, 4.0] {
            let p = exact_probabilities(&ideal(CircuitFamily::EraserX, 0.0, a));
            assert!(p[2].abs() < 1e-14);
            assert!((p[0] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn eraser_probability_list() {
        let (phi, alpha) = (0.0, PI);
        let p = exact_probabilities(&ideal(CircuitFamily::EraserX, phi, alpha));
        let expected = [0.5, 0.0, 0.0, 0.5];
        for i in 0..4 {
            assert!((p[i] - expected[i]).abs() < 1e-14, "{p:?}");
        }
    }

    #[test]
    fn interference_contrast_special_points() {
        let x = |phi, alpha| expectation_x(&ideal(CircuitFamily::WpX, phi, alpha)).unwrap();
        assert!((x(0.0, 0.0) - 1.0).abs() < 1e-14);
        assert!(x(FRAC_PI_2, 0.0).abs() < 1e-14);
        assert!(x(0.0, PI).abs() < 1e-14);
    }

    #[test]
    fn conditionals_at_full_entanglement() {
        let (x0, x1) = conditional_x(&ideal(CircuitFamily::EraserX, 0.0, PI)).unwrap();
        assert!((x0.value - 1.0).abs() < 1e-14 && (x1.value + 1.0).abs() < 1e-14);
        assert!(!x0.degenerate && !x1.degenerate);
    }

    #[test]
    fn distinguishability_extremes() {
        let d = |family, alpha| distinguishability(&ideal(family, 0.3, alpha)).unwrap().value;
        assert!((d(CircuitFamily::WpZ, PI) - 1.0).abs() < 1e-14);
        assert!(d(CircuitFamily::WpZ, 0.0).abs() < 1e-14);
        assert!(d(CircuitFamily::EraserZ, 1.7).abs() < 1e-14);
    }

    #[test]
    fn wrong_family_is_rejected() {
        assert!(matches!(
            expectation_x(&ideal(CircuitFamily::WpZ, 0.0, 0.0)),
            Err(CircuitError::WrongFamily { .. })
        ));
        assert!(conditional_x(&ideal(CircuitFamily::WpX, 0.0, 0.0)).is_err());
        assert!(distinguishability(&ideal(CircuitFamily::EraserX, 0.0, 0.0)).is_err());
    }

    #[test]
    fn degenerate_conditioning() {
        assert_eq!(conditional_x_from_probabilities(&[0.5, 0.0, 0.5, 0.0], 1), Err(CircuitError::DegenerateCondition));
        assert!(distinguishability_from_probabilities(&[0.5, 0.5, 0.0, 0.0]).is_err());
        // single-qubit circuit never populates the detector-1 column
        let sim = Simulator::new(&GateModel::IDEAL);
        let p = sim.probabilities(CircuitFamily::Mzi, 0.4, 0.0);
        assert!(conditional_x_from_probabilities(&p, 1).is_err());
    }

    #[test]
    fn two_sided_limit_resolves_removable_singularity() {
        // sin(φ)/φ style 0/0 at φ = 0
        let f = |phi: f64| {
            if phi.abs() < 1e-300 {
                Err(CircuitError::DegenerateCondition)
            } else {
                Ok(phi.sin() / phi)
            }
        };
        assert!((two_sided_limit(f, 0.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trace_distance_values() {
        assert!(trace_distance_d(0.0).abs() < 1e-15);
        assert!((trace_distance_d(PI) - 1.0).abs() < 1e-15);
        assert!((trace_distance_d(FRAC_PI_2) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn visibility_ideal_extremes() {
        let grid = linspace(0.0, TAU, 101);
        for method in [VisibilityMethod::GridExtrema, VisibilityMethod::Sinusoid, VisibilityMethod::Refined] {
            let v = |a| visibility_scan(&GateModel::IDEAL, CircuitFamily::WpX, Observable::X, a, &grid, method).unwrap();
            assert!((v(0.0) - 1.0).abs() < 1e-12, "{method:?}");
            assert!(v(PI).abs() < 1e-12, "{method:?}");
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = linspace(0.0, TAU, 50);
        let r = visibility_scan(&GateModel::IDEAL, CircuitFamily::WpX, Observable::X, 0.0, &grid, VisibilityMethod::GridExtrema);
        assert_eq!(r, Err(CircuitError::GridTooCoarse { points: 50 }));
        let short = linspace(0.0, PI, 200);
        assert!(visibility_scan(&GateModel::IDEAL, CircuitFamily::WpX, Observable::X, 0.0, &short, VisibilityMethod::Sinusoid).is_err());
    }

    #[test]
    fn mzi_contrast_is_cosine() {
        let sim = Simulator::new(&GateModel::IDEAL);
        for &phi in &[0.0, 0.5, 2.0, 4.4] {
            let x = x_from_probabilities(&sim.probabilities(CircuitFamily::Mzi, phi, 0.0));
            assert!((x - phi.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn physical_sequence_shape() {
        let seq = physical_circuit(&ideal(CircuitFamily::WpZ, 0.1, 0.2));
        assert_eq!(seq.iter().filter(|(w, _)| *w == Wire::Both).count(), 2);
        assert_eq!(seq.len(), 6);
        assert_eq!(physical_circuit(&ideal(CircuitFamily::Mzi, 0.1, 0.0)).len(), 2);
    }
}
