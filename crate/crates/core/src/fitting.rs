//! Experimental models `η·g + ε`, bounded χ² minimization, scores and k-fold
//! cross-validation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{CircuitFamily, Entangler, GateModel, Observable, Simulator};
use crate::estimators::Measurement;
use crate::gates::{BcnotOrdering, BiasParams, BiasTerms, SqgeParams, BIAS_BOUND, SQGE_BOUND};
use crate::noise::point_rng;

/// Distance to a bound below which a parameter is reported as bound-hit.
pub const BOUND_HIT_TOL: f64 = 1e-6;

/// Finite-difference step for the Jacobian.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    OutOfBounds { name: String, value: f64, lo: f64, hi: f64 },
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("parameter {0} is not part of the {1:?} tier")]
    ParameterNotInTier(String, Tier),
    #[error("data point {index} has non-positive or non-finite standard error {sigma}")]
    InvalidSigma { index: usize, sigma: f64 },
    #[error("{points} points do not exceed the {params} free parameters")]
    InsufficientData { points: usize, params: usize },
    #[error("no start of the multi-start budget converged")]
    NonConvergence,
    #[error("{folds}-fold cross-validation needs at least {needed} points, got {points}")]
    TooFewForFolds { folds: usize, needed: usize, points: usize },
}

/// Quantity a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `⟨X⟩` of the single-qubit interferometer.
    MziX,
    X,
    X0,
    X1,
    D,
    Dm,
}

impl Target {
    pub const TWO_QUBIT: [Target; 5] = [Target::D, Target::X, Target::X0, Target::X1, Target::Dm];

    pub fn family(self) -> CircuitFamily {
        match self {
            Target::MziX => CircuitFamily::Mzi,
            Target::X => CircuitFamily::WpX,
            Target::X0 | Target::X1 => CircuitFamily::EraserX,
            Target::D => CircuitFamily::WpZ,
            Target::Dm => CircuitFamily::EraserZ,
        }
    }

    pub fn observable(self) -> Observable {
        match self {
            Target::MziX | Target::X => Observable::X,
            Target::X0 => Observable::X0,
            Target::X1 => Observable::X1,
            Target::D => Observable::D,
            Target::Dm => Observable::Dm,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::MziX => "mzi_x",
            Target::X => "x",
            Target::X0 => "x0",
            Target::X1 => "x1",
            Target::D => "d",
            Target::Dm => "dm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Target::MziX, Target::X, Target::X0, Target::X1, Target::D, Target::Dm]
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

/// Gate-model tier of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Ideal gates with global shifts `φ → φ+Θ₁`, `α → α+Θ₂`.
    Ideal,
    CnotSqge,
    Bcnot2Sqge,
    Bcnot5Sqge,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::Ideal, Tier::CnotSqge, Tier::Bcnot2Sqge, Tier::Bcnot5Sqge];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Ideal => "ideal",
            Tier::CnotSqge => "cnot_sqge",
            Tier::Bcnot2Sqge => "bcnot2_sqge",
            Tier::Bcnot5Sqge => "bcnot5_sqge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Tier::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }

    fn bias_count(self) -> usize {
        match self {
            Tier::Ideal | Tier::CnotSqge => 0,
            Tier::Bcnot2Sqge => 2,
            Tier::Bcnot5Sqge => 5,
        }
    }
}

/// A model parameter; `Theta(k)` and `Beta(j)` are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Param {
    Eta,
    Epsilon,
    PhiShift,
    AlphaShift,
    Theta(u8),
    Beta(u8),
}

impl Param {
    pub fn name(self) -> String {
        match self {
            Param::Eta => "eta".into(),
            Param::Epsilon => "epsilon".into(),
            Param::PhiShift => "Theta1".into(),
            Param::AlphaShift => "Theta2".into(),
            Param::Theta(k) => format!("theta{}", k + 1),
            Param::Beta(j) => format!("beta{}", j + 1),
        }
    }

    pub fn bounds(self) -> (f64, f64) {
        match self {
            Param::Eta => (0.7, 1.0),
            Param::Epsilon => (-0.5, 0.5),
            Param::PhiShift | Param::AlphaShift | Param::Theta(_) => (-SQGE_BOUND, SQGE_BOUND),
            Param::Beta(_) => (-BIAS_BOUND, BIAS_BOUND),
        }
    }

    /// Value used when the parameter is not free.
    pub fn fixed_value(self) -> f64 {
        match self {
            Param::Eta => 1.0,
            _ => 0.0,
        }
    }
}

/// Target, tier and free-parameter list of an experimental model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub target: Target,
    pub tier: Tier,
    pub free: Vec<Param>,
}

impl ModelSpec {
    /// Default free parameters of `(target, tier)`.
    pub fn new(target: Target, tier: Tier) -> Self {
        let mut free = Vec::new();
        if tier == Tier::Ideal {
            match target {
                Target::Dm => free.push(Param::Epsilon),
                Target::D => free.extend([Param::Eta, Param::Epsilon, Param::AlphaShift]),
                Target::X0 | Target::MziX => free.extend([Param::Eta, Param::Epsilon, Param::PhiShift]),
                Target::X | Target::X1 => {
                    free.extend([Param::Eta, Param::Epsilon, Param::PhiShift, Param::AlphaShift])
                }
            }
        } else {
            free.extend([Param::Eta, Param::Epsilon]);
            let thetas = if target == Target::MziX { 2 } else { 5 };
            free.extend((0..thetas).map(Param::Theta));
            if target != Target::MziX {
                free.extend((0..tier.bias_count() as u8).map(Param::Beta));
            }
        }
        ModelSpec { target, tier, free }
    }

    pub fn with_free(target: Target, tier: Tier, free: Vec<Param>) -> Result<Self, FitError> {
        for &p in &free {
            let ok = match p {
                Param::Eta | Param::Epsilon => true,
                Param::PhiShift | Param::AlphaShift => tier == Tier::Ideal,
                Param::Theta(k) => tier != Tier::Ideal && k < 5,
                Param::Beta(j) => (j as usize) < tier.bias_count(),
            };
            if !ok {
                return Err(FitError::ParameterNotInTier(p.name(), tier));
            }
        }
        Ok(ModelSpec { target, tier, free })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.free.iter().map(|p| p.name()).collect()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.free.iter().map(|p| p.bounds()).collect()
    }

    pub fn check_bounds(&self, params: &[f64]) -> Result<(), FitError> {
        if params.len() != self.free.len() {
            return Err(FitError::ParameterCount { expected: self.free.len(), got: params.len() });
        }
        for (p, &v) in self.free.iter().zip(params) {
            let (lo, hi) = p.bounds();
            if !(lo..=hi).contains(&v) {
                return Err(FitError::OutOfBounds { name: p.name(), value: v, lo, hi });
            }
        }
        Ok(())
    }

    /// Builds the evaluator for one parameter vector (not bound-checked).
    pub fn prepare(&self, params: &[f64]) -> PreparedModel {
        let mut full = FullParams::default();
        for (p, &v) in self.free.iter().zip(params) {
            full.set(*p, v);
        }
        let gates = match self.tier {
            Tier::Ideal => GateModel::IDEAL,
            Tier::CnotSqge => GateModel::with_sqge(SqgeParams::new(full.theta)),
            Tier::Bcnot2Sqge | Tier::Bcnot5Sqge => GateModel {
                sqge: SqgeParams::new(full.theta),
                entangler: Entangler::Biased {
                    bias: BiasParams::new(full.beta),
                    ordering: BcnotOrdering::Plain,
                    terms: if self.tier == Tier::Bcnot2Sqge { BiasTerms::Two } else { BiasTerms::Five },
                },
            },
        };
        PreparedModel {
            target: self.target,
            zero_signal: self.tier == Tier::Ideal && self.target == Target::Dm,
            eta: full.eta,
            epsilon: full.epsilon,
            phi_shift: full.phi_shift,
            alpha_shift: full.alpha_shift,
            sim: Simulator::new(&gates),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct FullParams {
    eta: f64,
    epsilon: f64,
    phi_shift: f64,
    alpha_shift: f64,
    theta: [f64; 5],
    beta: [f64; 5],
}

impl Default for FullParams {
    fn default() -> Self {
        FullParams { eta: 1.0, epsilon: 0.0, phi_shift: 0.0, alpha_shift: 0.0, theta: [0.0; 5], beta: [0.0; 5] }
    }
}

impl FullParams {
    fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Eta => self.eta = v,
            Param::Epsilon => self.epsilon = v,
            Param::PhiShift => self.phi_shift = v,
            Param::AlphaShift => self.alpha_shift = v,
            Param::Theta(k) => self.theta[k as usize] = v,
            Param::Beta(j) => self.beta[j as usize] = v,
        }
    }
}

/// A model evaluator with the gate matrices for one parameter vector built.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    target: Target,
    zero_signal: bool,
    eta: f64,
    epsilon: f64,
    phi_shift: f64,
    alpha_shift: f64,
    sim: Simulator,
}

impl PreparedModel {
    /// Pure-state prediction `g(φ, α)`; NaN where the observable is undefined.
    pub fn signal(&self, phi: f64, alpha: f64) -> f64 {
        if self.zero_signal {
            return 0.0;
        }
        self.sim
            .observable(self.target.family(), self.target.observable(), phi + self.phi_shift, alpha + self.alpha_shift)
            .map(|v| v.value)
            .unwrap_or(f64::NAN)
    }

    pub fn eval(&self, phi: f64, alpha: f64) -> f64 {
        self.eta * self.signal(phi, alpha) + self.epsilon
    }
}

/// `η·g(φ, α) + ε` for a bound-checked parameter vector.
pub fn model_eval(spec: &ModelSpec, params: &[f64], phi: f64, alpha: f64) -> Result<f64, FitError> {
    spec.check_bounds(params)?;
    Ok(spec.prepare(params).eval(phi, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Number of multi-start points (first is the nominal start).
    pub starts: usize,
    pub max_iterations: usize,
    /// Offset into the low-discrepancy start sequence.
    pub start_offset: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { starts: 8, max_iterations: 200, start_offset: 0 }
    }
}

/// Raw residual `z − ẑ` at a data point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub phi: f64,
    pub alpha: f64,
    pub exec_order: usize,
    pub residual: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    /// Standard errors from the inverse Gauss-Newton Hessian.
    pub std_errors: Vec<f64>,
    pub bound_hits: Vec<bool>,
    pub chi2: f64,
    pub dof: usize,
    pub chi2_red: f64,
    pub rse: f64,
    pub r2: f64,
    pub residuals: Vec<Residual>,
    pub converged: bool,
    pub iterations: usize,
    /// Index of the winning start.
    pub start: usize,
}

impl FitResult {
    pub fn param(&self, p: Param) -> Option<f64> {
        self.spec.free.iter().position(|&q| q == p).map(|i| self.params[i])
    }

    pub fn std_error(&self, p: Param) -> Option<f64> {
        self.spec.free.iter().position(|&q| q == p).map(|i| self.std_errors[i])
    }

    pub fn score(&self) -> Score {
        Score { chi2_red: self.chi2_red, rse: self.rse, r2: self.r2 }
    }

    /// Residuals in execution order.
    pub fn residuals_by_exec_order(&self) -> Vec<f64> {
        let mut r = self.residuals.clone();
        r.sort_by_key(|x| x.exec_order);
        r.into_iter().map(|x| x.residual).collect()
    }

    /// Residuals ordered by α, then φ.
    pub fn residuals_by_grid(&self) -> Vec<f64> {
        let mut r = self.residuals.clone();
        r.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.phi.total_cmp(&b.phi)));
        r.into_iter().map(|x| x.residual).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub chi2_red: f64,
    pub rse: f64,
    pub r2: f64,
}

/// `(χ²ᵥ, RSE, R²)` of residuals `z − ẑ` with errors `σ` and `dof` degrees of
/// freedom.
pub fn score(observed: &[f64], residuals: &[f64], sigmas: &[f64], dof: usize) -> Score {
    let chi2: f64 = residuals.iter().zip(sigmas).map(|(r, s)| (r / s).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|z| (z - mean).powi(2)).sum();
    let d = dof.max(1) as f64;
    Score {
        chi2_red: chi2 / d,
        rse: (ss_res / d).sqrt(),
        r2: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 },
    }
}

/// Radical-inverse Halton point `index` in `dims` dimensions on `[0,1)`.
pub fn halton(index: usize, dims: usize) -> Vec<f64> {
    const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    (0..dims)
        .map(|d| {
            let base = PRIMES[d % PRIMES.len()];
            let mut f = 1.0;
            let mut r = 0.0;
            let mut i = index;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            r
        })
        .collect()
}

/// Multi-start points: the nominal start, then Halton points over the box.
pub fn start_points(spec: &ModelSpec, opts: &FitOptions) -> Vec<Vec<f64>> {
    let bounds = spec.bounds();
    let nominal: Vec<f64> = spec
        .free
        .iter()
        .map(|p| match p {
            Param::Eta => 0.95,
            _ => 0.0,
        })
        .collect();
    let mut out = vec![nominal];
    for i in 1..opts.starts {
        let h = halton(i + opts.start_offset, bounds.len());
        out.push(bounds.iter().zip(h).map(|(&(lo, hi), u)| lo + (hi - lo) * u).collect());
    }
    out.truncate(opts.starts.max(1));
    out
}

struct Problem<'a> {
    spec: &'a ModelSpec,
    data: &'a [Measurement],
}

impl Problem<'_> {
    /// Weighted residuals `(ẑ − z)/σ`.
    fn weighted(&self, params: &[f64]) -> Vec<f64> {
        let m = self.spec.prepare(params);
        self.data
            .iter()
            .map(|d| (m.eval(d.phi, d.alpha) - d.estimate.value) / d.estimate.std_error)
            .collect()
    }

    fn cost(r: &[f64]) -> f64 {
        let c: f64 = r.iter().map(|x| x * x).sum();
        if c.is_finite() {
            c
        } else {
            f64::INFINITY
        }
    }

    fn jacobian(&self, params: &[f64], r0: &[f64], bounds: &[(f64, f64)]) -> DMatrix<f64> {
        let n = r0.len();
        let m = params.len();
        let mut j = DMatrix::zeros(n, m);
        for k in 0..m {
            let (lo, hi) = bounds[k];
            let mut p = params.to_vec();
            let up = params[k] + FD_STEP <= hi;
            let down = params[k] - FD_STEP >= lo;
            let col: Vec<f64> = if up && down {
                p[k] = params[k] + FD_STEP;
                let rp = self.weighted(&p);
                p[k] = params[k] - FD_STEP;
                let rm = self.weighted(&p);
                rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * FD_STEP)).collect()
            } else if up {
                p[k] = params[k] + FD_STEP;
                let rp = self.weighted(&p);
                rp.iter().zip(r0).map(|(a, b)| (a - b) / FD_STEP).collect()
            } else {
                p[k] = params[k] - FD_STEP;
                let rm = self.weighted(&p);
                r0.iter().zip(&rm).map(|(a, b)| (a - b) / FD_STEP).collect()
            };
            for (i, v) in col.into_iter().enumerate() {
                j[(i, k)] = if v.is_finite() { v } else { 0.0 };
            }
        }
        j
    }
}

struct LmOutcome {
    params: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

fn clamp_to(bounds: &[(f64, f64)], p: &mut [f64]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Projected Levenberg-Marquardt from `start`.
fn levenberg_marquardt(problem: &Problem, start: &[f64], max_iter: usize) -> LmOutcome {
    let bounds = problem.spec.bounds();
    let m = start.len();
    let mut p = start.to_vec();
    clamp_to(&bounds, &mut p);
    let mut r = problem.weighted(&p);
    let mut cost = Problem::cost(&r);
    if !cost.is_finite() {
        return LmOutcome { params: p, cost, iterations: 0, converged: false };
    }
    let mut lambda = 1e-3;
    for iter in 1..=max_iter {
        let j = problem.jacobian(&p, &r, &bounds);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let width = |k: usize| bounds[k].1 - bounds[k].0;
        let active: Vec<bool> = (0..m)
            .map(|k| {
                let at_lo = p[k] - bounds[k].0 <= 1e-12 * width(k) && g[k] > 0.0;
                let at_hi = bounds[k].1 - p[k] <= 1e-12 * width(k) && g[k] < 0.0;
                at_lo || at_hi
            })
            .collect();
        let idx: Vec<usize> = (0..m).filter(|&k| !active[k]).collect();
        if idx.is_empty() || idx.iter().all(|&k| g[k].abs() <= 1e-14 * (1.0 + cost)) {
            return LmOutcome { params: p, cost, iterations: iter, converged: true };
        }
        let scale = idx.iter().map(|&k| a[(k, k)]).fold(0.0f64, f64::max).max(1e-300);
        let mut accepted = None;
        for _ in 0..40 {
            let k = idx.len();
            let mut sub = DMatrix::zeros(k, k);
            let mut rhs = DVector::zeros(k);
            for (u, &iu) in idx.iter().enumerate() {
                rhs[u] = -g[iu];
                for (v, &iv) in idx.iter().enumerate() {
                    sub[(u, v)] = a[(iu, iv)];
                }
                sub[(u, u)] += lambda * a[(iu, iu)].max(1e-9 * scale);
            }
            let Some(chol) = sub.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let delta = chol.solve(&rhs);
            let mut trial = p.clone();
            for (u, &iu) in idx.iter().enumerate() {
                trial[iu] += delta[u];
            }
            clamp_to(&bounds, &mut trial);
            let rt = problem.weighted(&trial);
            let ct = Problem::cost(&rt);
            if ct < cost {
                accepted = Some((trial, rt, ct));
                lambda = (lambda / 3.0).max(1e-12);
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
        let Some((trial, rt, ct)) = accepted else {
            return LmOutcome { params: p, cost, iterations: iter, converged: true };
        };
        let step = trial.iter().zip(&p).enumerate().map(|(k, (a, b))| (a - b).abs() / width(k)).fold(0.0, f64::max);
        let improvement = cost - ct;
        p = trial;
        r = rt;
        cost = ct;
        if improvement <= 1e-15 * (1.0 + cost) || step <= 1e-13 {
            return LmOutcome { params: p, cost, iterations: iter, converged: true };
        }
    }
    LmOutcome { params: p, cost, iterations: max_iter, converged: false }
}

fn validate_data(spec: &ModelSpec, data: &[Measurement]) -> Result<(), FitError> {
    for (index, d) in data.iter().enumerate() {
        let sigma = d.estimate.std_error;
        if !(sigma > 0.0 && sigma.is_finite() && d.estimate.value.is_finite()) {
            return Err(FitError::InvalidSigma { index, sigma });
        }
    }
    if data.len() <= spec.n_free() {
        return Err(FitError::InsufficientData { points: data.len(), params: spec.n_free() });
    }
    Ok(())
}

/// Bounded χ² fit of `spec` to `data` with the multi-start budget of `opts`.
pub fn fit(spec: &ModelSpec, data: &[Measurement], opts: &FitOptions) -> Result<FitResult, FitError> {
    validate_data(spec, data)?;
    let problem = Problem { spec, data };
    let starts = start_points(spec, opts);
    let outcomes: Vec<LmOutcome> =
        starts.par_iter().map(|s| levenberg_marquardt(&problem, s, opts.max_iterations)).collect();
    let (start, best) = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.converged && o.cost.is_finite())
        .min_by(|(i, a), (j, b)| a.cost.total_cmp(&b.cost).then(i.cmp(j)))
        .ok_or(FitError::NonConvergence)?;
    Ok(summarize(spec, data, &problem, &best.params, best.iterations, start))
}

fn summarize(
    spec: &ModelSpec,
    data: &[Measurement],
    problem: &Problem,
    params: &[f64],
    iterations: usize,
    start: usize,
) -> FitResult {
    let bounds = spec.bounds();
    let model = spec.prepare(params);
    let residuals: Vec<Residual> = data
        .iter()
        .map(|d| Residual {
            phi: d.phi,
            alpha: d.alpha,
            exec_order: d.exec_order,
            residual: d.estimate.value - model.eval(d.phi, d.alpha),
            sigma: d.estimate.std_error,
        })
        .collect();
    let observed: Vec<f64> = data.iter().map(|d| d.estimate.value).collect();
    let raw: Vec<f64> = residuals.iter().map(|r| r.residual).collect();
    let sig: Vec<f64> = residuals.iter().map(|r| r.sigma).collect();
    let dof = data.len() - spec.n_free();
    let s = score(&observed, &raw, &sig, dof);
    let chi2 = raw.iter().zip(&sig).map(|(r, s)| (r / s).powi(2)).sum();
    let r0 = problem.weighted(params);
    let j = problem.jacobian(params, &r0, &bounds);
    let std_errors = parameter_std_errors(&j);
    let bound_hits =
        params.iter().zip(&bounds).map(|(&v, &(lo, hi))| v - lo <= BOUND_HIT_TOL || hi - v <= BOUND_HIT_TOL).collect();
    FitResult {
        spec: spec.clone(),
        params: params.to_vec(),
        std_errors,
        bound_hits,
        chi2,
        dof,
        chi2_red: s.chi2_red,
        rse: s.rse,
        r2: s.r2,
        residuals,
        converged: true,
        iterations,
        start,
    }
}

/// `√diag((JᵀJ)⁺)`; unidentifiable directions get infinite errors.
fn parameter_std_errors(j: &DMatrix<f64>) -> Vec<f64> {
    let a = j.transpose() * j;
    let m = a.nrows();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let (Some(u), Some(vt)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        return vec![f64::INFINITY; m];
    };
    let tol = smax * 1e-12 * m as f64;
    (0..m)
        .map(|k| {
            let mut var = 0.0;
            for (s, sv) in svd.singular_values.iter().enumerate() {
                if *sv > tol {
                    var += vt[(s, k)] * u[(k, s)] / sv;
                } else if vt[(s, k)].abs() > 1e-6 {
                    return f64::INFINITY;
                }
            }
            var.max(0.0).sqrt()
        })
        .collect()
}

/// Assignment of each point to one of `k` folds from a seeded permutation.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut point_rng(seed, u64::MAX));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub params: Vec<f64>,
    pub bound_hits: Vec<bool>,
    pub train_chi2_red: f64,
    /// `χ²_test / C_test`.
    pub test_chi2_red: f64,
    /// `√(Σ(z − ẑ)² / C_test)`.
    pub test_rse: f64,
    pub test_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub spec: ModelSpec,
    pub folds: Vec<FoldResult>,
    pub chi2_red: f64,
    /// Standard error of the fold mean of `χ²ᵥ`.
    pub chi2_red_se: f64,
    pub rse: f64,
    pub train_chi2_red: f64,
    pub param_mean: Vec<f64>,
    pub param_std: Vec<f64>,
    /// Parameter hit a bound in at least one fold.
    pub unstable: Vec<bool>,
}

impl CvResult {
    pub fn param_mean(&self, p: Param) -> Option<f64> {
        self.spec.free.iter().position(|&q| q == p).map(|i| self.param_mean[i])
    }

    pub fn unstable_count(&self) -> usize {
        self.unstable.iter().filter(|&&u| u).count()
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// `k`-fold cross-validation with folds drawn from `seed`.
pub fn cross_validate(
    spec: &ModelSpec,
    data: &[Measurement],
    k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<CvResult, FitError> {
    let needed = 10 * k;
    if k < 2 || data.len() < needed {
        return Err(FitError::TooFewForFolds { folds: k, needed, points: data.len() });
    }
    validate_data(spec, data)?;
    let assignment = fold_assignment(data.len(), k, seed);
    let folds = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, test): (Vec<_>, Vec<_>) = data.iter().zip(&assignment).partition(|(_, &a)| a != f);
            let train: Vec<Measurement> = train.into_iter().map(|(d, _)| *d).collect();
            let test: Vec<Measurement> = test.into_iter().map(|(d, _)| *d).collect();
            let r = fit(spec, &train, opts)?;
            let model = spec.prepare(&r.params);
            let (mut chi2, mut ss) = (0.0, 0.0);
            for d in &test {
                let res = d.estimate.value - model.eval(d.phi, d.alpha);
                chi2 += (res / d.estimate.std_error).powi(2);
                ss += res * res;
            }
            let c = test.len() as f64;
            Ok(FoldResult {
                params: r.params,
                bound_hits: r.bound_hits,
                train_chi2_red: r.chi2_red,
                test_chi2_red: chi2 / c,
                test_rse: (ss / c).sqrt(),
                test_points: test.len(),
            })
        })
        .collect::<Result<Vec<_>, FitError>>()?;
    let chi: Vec<f64> = folds.iter().map(|f| f.test_chi2_red).collect();
    let (chi2_red, chi_std) = mean_std(&chi);
    let rse = mean_std(&folds.iter().map(|f| f.test_rse).collect::<Vec<_>>()).0;
    let train_chi2_red = mean_std(&folds.iter().map(|f| f.train_chi2_red).collect::<Vec<_>>()).0;
    let m = spec.n_free();
    let (mut param_mean, mut param_std, mut unstable) = (vec![0.0; m], vec![0.0; m], vec![false; m]);
    for i in 0..m {
        let vals: Vec<f64> = folds.iter().map(|f| f.params[i]).collect();
        (param_mean[i], param_std[i]) = mean_std(&vals);
        unstable[i] = folds.iter().any(|f| f.bound_hits[i]);
    }
    Ok(CvResult {
        spec: spec.clone(),
        folds,
        chi2_red,
        chi2_red_se: chi_std / (k as f64).sqrt(),
        rse,
        train_chi2_red,
        param_mean,
        param_std,
        unstable,
    })
}

/// Index of the preferred model: lowest out-of-fold `χ²ᵥ`, where models
/// within one fold standard error of the best are compared by their number of
/// unstable parameters first.
pub fn select_model(results: &[CvResult]) -> Option<usize> {
    let best = results.iter().enumerate().min_by(|(_, a), (_, b)| a.chi2_red.total_cmp(&b.chi2_red))?.0;
    let tol = results[best].chi2_red_se;
    results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.chi2_red - results[best].chi2_red <= tol)
        .min_by(|(i, a), (j, b)| {
            a.unstable_count().cmp(&b.unstable_count()).then(a.chi2_red.total_cmp(&b.chi2_red)).then(i.cmp(j))
        })
        .map(|(i, _)| i)
}

/// Radians expressed in units of π, as parameter tables report angles.
pub fn in_pi_units(p: Param, v: f64) -> f64 {
    match p {
        Param::PhiShift | Param::AlphaShift | Param::Theta(_) => v / PI,
        _ => v,
    }
}
