//! Residual diagnostics: runs test, multinomial bootstrap and residual maps.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::fitting::{FitResult, Residual};
use crate::noise::{point_rng, sample_multinomial, OutcomeCounts};

/// Smallest sequence accepted by [`runs_test`].
pub const MIN_RUNS_LENGTH: usize = 20;

/// Smallest bootstrap budget accepted by [`bootstrap_std`].
pub const MIN_BOOTSTRAP: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("runs test needs at least {MIN_RUNS_LENGTH} values, got {0}")]
    TooShort(usize),
    #[error("bootstrap needs at least {MIN_BOOTSTRAP} resamples, got {0}")]
    TooFewResamples(usize),
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsTestResult {
    pub n_plus: usize,
    pub n_minus: usize,
    pub runs: usize,
    pub z: f64,
    pub p_value: f64,
    /// Every value fell on one side of the mean; the test is undefined and
    /// `p_value` is reported as 0.
    pub all_same_sign: bool,
}

impl RunsTestResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Wald-Wolfowitz runs test on `values` dichotomized at their mean, with the
/// two-sided normal approximation. Values equal to the mean count as positive.
pub fn runs_test(values: &[f64]) -> Result<RunsTestResult, StatsError> {
    let n = values.len();
    if n < MIN_RUNS_LENGTH {
        return Err(StatsError::TooShort(n));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let signs: Vec<bool> = values.iter().map(|&v| v >= mean).collect();
    let n_plus = signs.iter().filter(|&&s| s).count();
    let n_minus = n - n_plus;
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    if n_plus == 0 || n_minus == 0 {
        return Ok(RunsTestResult { n_plus, n_minus, runs, z: f64::NAN, p_value: 0.0, all_same_sign: true });
    }
    let (np, nm, nf) = (n_plus as f64, n_minus as f64, n as f64);
    let mu = 1.0 + 2.0 * np * nm / nf;
    let var = 2.0 * np * nm * (2.0 * np * nm - nf) / (nf * nf * (nf - 1.0));
    let z = (runs as f64 - mu) / var.sqrt();
    let normal = Normal::standard();
    let p_value = (2.0 * normal.sf(z.abs())).min(1.0);
    Ok(RunsTestResult { n_plus, n_minus, runs, z, p_value, all_same_sign: false })
}

/// Standard deviation of `statistic` over `b` multinomial resamples of every
/// count record. Resamples where the statistic is not finite are dropped.
pub fn bootstrap_std<F>(counts: &[OutcomeCounts], statistic: F, b: usize, seed: u64) -> Result<f64, StatsError>
where
    F: Fn(&[OutcomeCounts]) -> f64 + Sync,
{
    if b < MIN_BOOTSTRAP {
        return Err(StatsError::TooFewResamples(b));
    }
    let values: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(seed, i as u64);
            let resampled: Vec<OutcomeCounts> = counts
                .iter()
                .map(|c| {
                    let p = c.frequencies();
                    OutcomeCounts { counts: sample_multinomial(&p, c.shots, &mut rng), shots: c.shots, seed: c.seed }
                })
                .collect();
            statistic(&resampled)
        })
        .collect();
    let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.len() < 2 {
        return Ok(0.0);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    Ok(var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMap {
    pub points: Vec<Residual>,
    pub min: f64,
    pub max: f64,
}

impl ResidualMap {
    /// Residuals sorted by α, then φ.
    pub fn grid_ordered(&self) -> Vec<f64> {
        let mut p = self.points.clone();
        p.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.phi.total_cmp(&b.phi)));
        p.into_iter().map(|r| r.residual).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["phi", "alpha", "residual"])?;
        for r in &self.points {
            out.write_record([r.phi.to_string(), r.alpha.to_string(), r.residual.to_string()])?;
        }
        out.write_record(["min", "", &self.min.to_string()])?;
        out.write_record(["max", "", &self.max.to_string()])?;
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> csv::Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

pub fn residual_map(result: &FitResult) -> ResidualMap {
    residual_map_of(&result.residuals)
}

pub fn residual_map_of(points: &[Residual]) -> ResidualMap {
    let min = points.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|r| r.residual).fold(f64::NEG_INFINITY, f64::max);
    ResidualMap { points: points.to_vec(), min, max }
}
