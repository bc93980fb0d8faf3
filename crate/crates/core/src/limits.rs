//! Exact visibility and distinguishability curves over `α ∈ [0, 4π]` for a
//! biased gate model.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::campaign::{BiasSection, SqgeSection};
use crate::circuits::{
    linspace, visibility_scan, CircuitError, CircuitFamily, Entangler, GateModel, Observable, Simulator,
    VisibilityMethod,
};

fn default_alpha_points() -> usize {
    401
}
fn default_phi_points() -> usize {
    201
}
fn default_method() -> VisibilityMethod {
    VisibilityMethod::Refined
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(default)]
    pub bias: BiasSection,
    #[serde(default)]
    pub sqge: SqgeSection,
    #[serde(default = "default_alpha_points")]
    pub alpha_points: usize,
    #[serde(default = "default_phi_points")]
    pub phi_points: usize,
    #[serde(default = "default_method")]
    pub method: VisibilityMethod,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        LimitsConfig {
            bias: BiasSection::default(),
            sqge: SqgeSection::default(),
            alpha_points: 401,
            phi_points: 201,
            method: VisibilityMethod::Refined,
        }
    }
}

impl LimitsConfig {
    pub fn model(&self) -> GateModel {
        GateModel {
            sqge: self.sqge.params(),
            entangler: Entangler::Biased { bias: self.bias.params(), ordering: self.bias.ordering, terms: self.bias.terms },
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        linspace(0.0, 2.0 * TAU, self.alpha_points)
    }
}

/// One α sample of the limit curves. `d` and `dm` are averaged over φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitsRow {
    pub alpha: f64,
    pub v_x: f64,
    pub d: f64,
    pub v_x0: f64,
    pub v_x1: f64,
    pub dm: f64,
}

/// Mean of `observable` over the φ grid at fixed α.
pub fn phi_average(
    sim: &Simulator,
    family: CircuitFamily,
    observable: Observable,
    alpha: f64,
    phis: &[f64],
) -> Result<f64, CircuitError> {
    // drop the duplicated 2π endpoint so the average is over one period
    let period = if phis.len() > 1 && (phis[phis.len() - 1] - phis[0] - TAU).abs() < 1e-12 {
        &phis[..phis.len() - 1]
    } else {
        phis
    };
    let mut total = 0.0;
    for &phi in period {
        total += sim.observable(family, observable, phi, alpha)?.value;
    }
    Ok(total / period.len() as f64)
}

pub fn demo_limits(
    model: &GateModel,
    alphas: &[f64],
    phis: &[f64],
    method: VisibilityMethod,
) -> Result<Vec<LimitsRow>, CircuitError> {
    let sim = Simulator::new(model);
    alphas
        .iter()
        .map(|&alpha| {
            let v = |family, obs| visibility_scan(model, family, obs, alpha, phis, method);
            Ok(LimitsRow {
                alpha,
                v_x: v(CircuitFamily::WpX, Observable::X)?,
                d: phi_average(&sim, CircuitFamily::WpZ, Observable::D, alpha, phis)?,
                v_x0: v(CircuitFamily::EraserX, Observable::X0)?,
                v_x1: v(CircuitFamily::EraserX, Observable::X1)?,
                dm: phi_average(&sim, CircuitFamily::EraserZ, Observable::Dm, alpha, phis)?,
            })
        })
        .collect()
}

pub fn run_limits(cfg: &LimitsConfig) -> Result<Vec<LimitsRow>, CircuitError> {
    demo_limits(&cfg.model(), &cfg.alphas(), &linspace(0.0, TAU, cfg.phi_points), cfg.method)
}

pub fn write_limits(rows: &[LimitsRow], path: &Path) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["alpha", "alpha_over_pi", "V_X", "D", "V_X0", "V_X1", "Dm"])?;
    for r in rows {
        w.write_record(
            [r.alpha, r.alpha / PI, r.v_x, r.d, r.v_x0, r.v_x1, r.dm].iter().map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}
