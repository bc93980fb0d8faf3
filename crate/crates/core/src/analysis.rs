//! Model comparison over gate-model tiers and the report files it produces.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::campaign::Campaign;
use crate::circuits::{grid_visibility, sinusoid_visibility, CircuitFamily, VisibilityMethod};
use crate::estimators;
use crate::fitting::{cross_validate, select_model, CvResult, FitError, FitOptions, ModelSpec, Residual, Target, Tier};
use crate::noise::{NoiseError, OutcomeCounts};
use crate::stats::{bootstrap_std, residual_map_of, runs_test, ResidualMap, RunsTestResult, StatsError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid analysis configuration: {0}")]
    Config(String),
    #[error("fit of {target:?} with tier {tier:?} failed: {source}")]
    Fit { target: Target, tier: Tier, source: FitError },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn default_tiers() -> Vec<Tier> {
    Tier::ALL.to_vec()
}
fn default_folds() -> usize {
    10
}
fn default_starts() -> usize {
    8
}
fn default_iterations() -> usize {
    200
}
fn default_bootstrap() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_tiers")]
    pub tiers: Vec<Tier>,
    /// Restricts the analysed targets; all targets of each dataset otherwise.
    #[serde(default)]
    pub targets: Option<Vec<Target>>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default)]
    pub visibility: VisibilityMethod,
    /// Apply readout mitigation from the calibration runs before fitting.
    #[serde(default)]
    pub mitigate: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            tiers: default_tiers(),
            targets: None,
            folds: 10,
            seed: 0,
            starts: 8,
            max_iterations: 200,
            bootstrap: 1000,
            visibility: VisibilityMethod::GridExtrema,
            mitigate: false,
        }
    }
}

impl AnalysisConfig {
    pub fn from_toml(text: &str) -> Result<Self, AnalysisError> {
        let c: AnalysisConfig = toml::from_str(text).map_err(|e| AnalysisError::Config(e.to_string()))?;
        if c.tiers.is_empty() {
            return Err(AnalysisError::Config("tiers must not be empty".into()));
        }
        if c.folds < 2 {
            return Err(AnalysisError::Config("folds must be at least 2".into()));
        }
        Ok(c)
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions { starts: self.starts, max_iterations: self.max_iterations, start_offset: 0 }
    }
}

/// Fit targets available from a circuit family.
pub fn targets_for(family: CircuitFamily) -> Vec<Target> {
    match family {
        CircuitFamily::Mzi => vec![Target::MziX],
        CircuitFamily::WpX => vec![Target::X],
        CircuitFamily::WpZ => vec![Target::D],
        CircuitFamily::EraserX => vec![Target::X0, Target::X1],
        CircuitFamily::EraserZ => vec![Target::Dm],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierReport {
    pub tier: Tier,
    pub cv: CvResult,
    /// Residuals at the fold-averaged parameters.
    pub residuals: ResidualMap,
    pub runs_exec_order: Option<RunsTestResult>,
    pub runs_grid_order: Option<RunsTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: Target,
    pub points: usize,
    pub tiers: Vec<TierReport>,
    pub selected: Option<Tier>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub alpha: f64,
    pub visibility: f64,
    pub visibility_se: f64,
    pub distinguishability: f64,
    pub distinguishability_se: f64,
    pub sum: f64,
    pub sum_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub targets: Vec<TargetReport>,
    pub duality: Vec<DualityRow>,
}

/// Residuals of `spec` at `params` over `data`.
pub fn residuals_at(spec: &ModelSpec, params: &[f64], data: &[estimators::Measurement]) -> Vec<Residual> {
    let m = spec.prepare(params);
    data.iter()
        .map(|d| Residual {
            phi: d.phi,
            alpha: d.alpha,
            exec_order: d.exec_order,
            residual: d.estimate.value - m.eval(d.phi, d.alpha),
            sigma: d.estimate.std_error,
        })
        .collect()
}

/// Cross-validates every configured tier for `target`.
pub fn analyze_target(
    target: Target,
    data: &[estimators::Measurement],
    cfg: &AnalysisConfig,
) -> Result<TargetReport, AnalysisError> {
    let opts = cfg.fit_options();
    let mut tiers = Vec::new();
    for &tier in &cfg.tiers {
        let spec = ModelSpec::new(target, tier);
        let cv = cross_validate(&spec, data, cfg.folds, cfg.seed, &opts)
            .map_err(|source| AnalysisError::Fit { target, tier, source })?;
        let points = residuals_at(&spec, &cv.param_mean, data);
        let map = residual_map_of(&points);
        let mut by_exec = points.clone();
        by_exec.sort_by_key(|r| r.exec_order);
        let exec: Vec<f64> = by_exec.iter().map(|r| r.residual).collect();
        tiers.push(TierReport {
            tier,
            cv,
            runs_exec_order: runs_test(&exec).ok(),
            runs_grid_order: runs_test(&map.grid_ordered()).ok(),
            residuals: map,
        });
    }
    let cvs: Vec<CvResult> = tiers.iter().map(|t| t.cv.clone()).collect();
    let selected = select_model(&cvs).map(|i| tiers[i].tier);
    Ok(TargetReport { target, points: data.len(), tiers, selected })
}

fn group_by_alpha(c: &Campaign) -> BTreeMap<u64, Vec<(f64, OutcomeCounts)>> {
    let mut m: BTreeMap<u64, Vec<(f64, OutcomeCounts)>> = BTreeMap::new();
    for p in &c.points {
        m.entry(p.alpha.to_bits()).or_default().push((p.phi, p.counts));
    }
    for v in m.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    m
}

/// Visibility of the `⟨X⟩` estimates of one α slice.
pub fn slice_visibility(phis: &[f64], counts: &[OutcomeCounts], method: VisibilityMethod) -> f64 {
    let xs: Vec<f64> = counts.iter().map(|c| estimators::estimate_x(c).map_or(f64::NAN, |e| e.value)).collect();
    match method {
        VisibilityMethod::Sinusoid => sinusoid_visibility(phis, &xs),
        VisibilityMethod::GridExtrema | VisibilityMethod::Refined => grid_visibility(&xs),
    }
}

/// `𝒱(α)` from an interference campaign and `𝒟(α)` (averaged over φ) from a
/// which-path campaign sharing its α grid.
pub fn duality_curve(
    interference: &Campaign,
    which_path: &Campaign,
    cfg: &AnalysisConfig,
) -> Result<Vec<DualityRow>, AnalysisError> {
    let xs = group_by_alpha(interference);
    let ds = group_by_alpha(which_path);
    let mut rows = Vec::new();
    for (i, (key, xslice)) in xs.iter().enumerate() {
        let Some(dslice) = ds.get(key) else { continue };
        let alpha = f64::from_bits(*key);
        let phis: Vec<f64> = xslice.iter().map(|x| x.0).collect();
        let counts: Vec<OutcomeCounts> = xslice.iter().map(|x| x.1).collect();
        let method = cfg.visibility;
        let v = slice_visibility(&phis, &counts, method);
        let v_se = bootstrap_std(&counts, |cs| slice_visibility(&phis, cs, method), cfg.bootstrap,
            cfg.seed.wrapping_add(i as u64))?;
        let est: Vec<_> = dslice.iter().filter_map(|(_, c)| estimators::estimate_d(c).ok()).collect();
        if est.is_empty() {
            continue;
        }
        let n = est.len() as f64;
        let d = est.iter().map(|e| e.value).sum::<f64>() / n;
        let d_se = est.iter().map(|e| e.std_error.powi(2)).sum::<f64>().sqrt() / n;
        let sum = v * v + d * d;
        let sum_se = ((2.0 * v * v_se).powi(2) + (2.0 * d * d_se).powi(2)).sqrt();
        rows.push(DualityRow {
            alpha,
            visibility: v,
            visibility_se: v_se,
            distinguishability: d,
            distinguishability_se: d_se,
            sum,
            sum_se,
        });
    }
    Ok(rows)
}

/// Analyses every dataset and, when both an interference (`wp_x`) and a
/// which-path (`wp_z`) dataset are present, their duality curve.
pub fn run_analysis(datasets: &[Campaign], cfg: &AnalysisConfig) -> Result<AnalysisReport, AnalysisError> {
    let mut targets = Vec::new();
    let prepared: Vec<Campaign> =
        if cfg.mitigate { datasets.iter().map(|d| d.mitigated()).collect::<Result<_, _>>()? } else { datasets.to_vec() };
    for c in &prepared {
        for target in targets_for(c.config.family) {
            if cfg.targets.as_ref().is_some_and(|t| !t.contains(&target)) {
                continue;
            }
            let data = c.measurements(target.observable());
            log::info!("analysing {} ({} points)", target.name(), data.len());
            targets.push(analyze_target(target, &data, cfg)?);
        }
    }
    let find = |f: CircuitFamily| prepared.iter().find(|c| c.config.family == f);
    let duality = match (find(CircuitFamily::WpX), find(CircuitFamily::WpZ)) {
        (Some(x), Some(d)) => duality_curve(x, d, cfg)?,
        _ => Vec::new(),
    };
    Ok(AnalysisReport { targets, duality })
}

fn csv_out(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), AnalysisError> {
    let err = |source| AnalysisError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.flush().map_err(|source| AnalysisError::Io { path: path.to_path_buf(), source })
}

/// Writes `scores.csv`, `params.csv`, `runs.csv`, `duality.csv`, one residual
/// map per target and tier, and `report.json`.
pub fn write_report(report: &AnalysisReport, dir: &Path) -> Result<(), AnalysisError> {
    fs::create_dir_all(dir).map_err(|source| AnalysisError::Io { path: dir.to_path_buf(), source })?;
    let mut scores = Vec::new();
    let mut params = Vec::new();
    let mut runs = Vec::new();
    for t in &report.targets {
        for tr in &t.tiers {
            let (tn, kn) = (t.target.name().to_string(), tr.tier.name().to_string());
            scores.push(vec![
                tn.clone(),
                kn.clone(),
                tr.cv.chi2_red.to_string(),
                tr.cv.chi2_red_se.to_string(),
                tr.cv.rse.to_string(),
                tr.cv.train_chi2_red.to_string(),
                (t.selected == Some(tr.tier)).to_string(),
            ]);
            for (i, name) in tr.cv.spec.names().into_iter().enumerate() {
                params.push(vec![
                    tn.clone(),
                    kn.clone(),
                    name,
                    tr.cv.param_mean[i].to_string(),
                    tr.cv.param_std[i].to_string(),
                    tr.cv.unstable[i].to_string(),
                ]);
            }
            for (order, r) in [("exec", &tr.runs_exec_order), ("grid", &tr.runs_grid_order)] {
                if let Some(r) = r {
                    runs.push(vec![
                        tn.clone(),
                        kn.clone(),
                        order.into(),
                        r.n_plus.to_string(),
                        r.n_minus.to_string(),
                        r.runs.to_string(),
                        r.z.to_string(),
                        r.p_value.to_string(),
                    ]);
                }
            }
            let path = dir.join(format!("residuals_{tn}_{kn}.csv"));
            tr.residuals.save(&path).map_err(|source| AnalysisError::Csv { path, source })?;
        }
    }
    csv_out(&dir.join("scores.csv"), &["target", "tier", "chi2_red", "chi2_red_se", "rse", "train_chi2_red", "selected"], scores)?;
    csv_out(&dir.join("params.csv"), &["target", "tier", "param", "mean", "std", "unstable"], params)?;
    csv_out(&dir.join("runs.csv"), &["target", "tier", "order", "n_plus", "n_minus", "runs", "z", "p_value"], runs)?;
    let duality = report
        .duality
        .iter()
        .map(|r| {
            [r.alpha, r.visibility, r.visibility_se, r.distinguishability, r.distinguishability_se, r.sum, r.sum_se]
                .iter()
                .map(|v| v.to_string())
                .collect()
        })
        .collect();
    csv_out(&dir.join("duality.csv"), &["alpha", "V", "V_se", "D", "D_se", "V2_plus_D2", "V2_plus_D2_se"], duality)?;
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&path, text + "\n").map_err(|source| AnalysisError::Io { path, source })
}

