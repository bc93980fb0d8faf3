//! Campaign configuration, execution over a `(φ, α)` grid and dataset files.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{linspace, CircuitFamily, Entangler, GateModel, Observable, Simulator};
use crate::estimators::{self, Estimate, Measurement};
use crate::gates::{BcnotOrdering, BiasParams, BiasTerms, SqgeParams};
use crate::noise::{
    calibration_counts, mitigation_matrix, point_rng, sample_probabilities, MitigationMatrix, MixtureNoise, NoiseError,
    OutcomeCounts, ReadoutModel,
};

/// Circuits per hardware batch, four of which are readout calibrations.
pub const BATCH_SIZE: usize = 896;
pub const MITIGATION_CIRCUITS_PER_BATCH: usize = 4;
/// Device repetition time, kept in the manifest for reference only.
pub const REPETITION_TIME_US: f64 = 500.0;

pub const COUNTS_FILE: &str = "counts.csv";
pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CALIBRATION_FILE: &str = "calibration.csv";

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed dataset file {path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CampaignError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CampaignError::Io { path: path.to_path_buf(), source }
    }

    fn format(path: &Path, message: impl ToString) -> Self {
        CampaignError::Format { path: path.to_path_buf(), message: message.to_string() }
    }
}

fn default_points() -> usize {
    101
}
fn default_max() -> f64 {
    TAU
}
fn default_shots() -> u64 {
    8192
}

/// Regular `(φ, α)` grid with endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_points")]
    pub phi_points: usize,
    #[serde(default = "default_points")]
    pub alpha_points: usize,
    #[serde(default)]
    pub phi_min: f64,
    #[serde(default = "default_max")]
    pub phi_max: f64,
    #[serde(default)]
    pub alpha_min: f64,
    #[serde(default = "default_max")]
    pub alpha_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { phi_points: 101, alpha_points: 101, phi_min: 0.0, phi_max: TAU, alpha_min: 0.0, alpha_max: TAU }
    }
}

impl GridSpec {
    pub fn square(points: usize) -> Self {
        GridSpec { phi_points: points, alpha_points: points, ..Self::default() }
    }

    pub fn phis(&self) -> Vec<f64> {
        linspace(self.phi_min, self.phi_max, self.phi_points)
    }

    /// α values; the single-qubit family always uses `α = 0`.
    pub fn alphas(&self, family: CircuitFamily) -> Vec<f64> {
        if family == CircuitFamily::Mzi {
            vec![0.0]
        } else {
            linspace(self.alpha_min, self.alpha_max, self.alpha_points)
        }
    }

    /// Points in grid order: α outer, φ inner.
    pub fn points(&self, family: CircuitFamily) -> Vec<(f64, f64)> {
        let phis = self.phis();
        self.alphas(family).into_iter().flat_map(|a| phis.iter().map(move |&p| (p, a))).collect()
    }

    fn validate(&self) -> Result<(), CampaignError> {
        let in_range = |x: f64| (-1e-12..=TAU + 1e-12).contains(&x);
        if self.phi_points == 0 || self.alpha_points == 0 {
            return Err(CampaignError::Config("grid needs at least one point per axis".into()));
        }
        for (name, v) in [
            ("grid.phi_min", self.phi_min),
            ("grid.phi_max", self.phi_max),
            ("grid.alpha_min", self.alpha_min),
            ("grid.alpha_max", self.alpha_max),
        ] {
            if !in_range(v) {
                return Err(CampaignError::Config(format!("{name} = {v} outside [0, 2π]")));
            }
        }
        if self.phi_min > self.phi_max || self.alpha_min > self.alpha_max {
            return Err(CampaignError::Config("grid minimum exceeds maximum".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingOrder {
    /// Uniform random permutation of the grid.
    #[default]
    Random,
    /// Grid order.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqgeSection {
    #[serde(default)]
    pub theta1: f64,
    #[serde(default)]
    pub theta2: f64,
    #[serde(default)]
    pub theta3: f64,
    #[serde(default)]
    pub theta4: f64,
    #[serde(default)]
    pub theta5: f64,
}

impl SqgeSection {
    pub fn params(&self) -> SqgeParams {
        SqgeParams::new([self.theta1, self.theta2, self.theta3, self.theta4, self.theta5])
    }

    pub fn from_params(p: &SqgeParams) -> Self {
        let [theta1, theta2, theta3, theta4, theta5] = p.theta;
        SqgeSection { theta1, theta2, theta3, theta4, theta5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSection {
    #[serde(default)]
    pub beta1: f64,
    #[serde(default)]
    pub beta2: f64,
    #[serde(default)]
    pub beta3: f64,
    #[serde(default)]
    pub beta4: f64,
    #[serde(default)]
    pub beta5: f64,
    #[serde(default)]
    pub ordering: BcnotOrdering,
    #[serde(default)]
    pub terms: BiasTerms,
}

impl BiasSection {
    pub fn params(&self) -> BiasParams {
        BiasParams::new([self.beta1, self.beta2, self.beta3, self.beta4, self.beta5])
    }

    pub fn from_params(p: &BiasParams) -> Self {
        let [beta1, beta2, beta3, beta4, beta5] = p.beta;
        BiasSection { beta1, beta2, beta3, beta4, beta5, ..Self::default() }
    }
}

/// Incoherent mixture mapping `⟨X⟩ ↦ η⟨X⟩ + ε` on the interferometer qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSection {
    pub eta: f64,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default = "default_shots")]
    pub shots: u64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection { shots: 8192 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub family: CircuitFamily,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub order: SamplingOrder,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sqge: SqgeSection,
    /// Present when the CNOTs are replaced by biased CNOTs.
    #[serde(default)]
    pub bias: Option<BiasSection>,
    #[serde(default)]
    pub readout: ReadoutModel,
    #[serde(default)]
    pub mixture: Option<MixtureSection>,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(family: CircuitFamily) -> Self {
        CampaignConfig {
            family,
            grid: GridSpec::default(),
            shots: 8192,
            order: SamplingOrder::Random,
            seed: 0,
            sqge: SqgeSection::default(),
            bias: None,
            readout: ReadoutModel::IDEAL,
            mixture: None,
            calibration: CalibrationSection::default(),
            output: None,
        }
    }

    /// Parses TOML; sections may be written as tables or dotted keys.
    pub fn from_toml(text: &str) -> Result<Self, CampaignError> {
        let c: CampaignConfig = toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Loads a TOML config, or the config recorded in a campaign manifest if
    /// the path ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text = fs::read_to_string(path).map_err(|e| CampaignError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: Manifest = serde_json::from_str(&text).map_err(|e| CampaignError::Config(e.to_string()))?;
            m.config.validate()?;
            Ok(m.config)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.shots < 1 {
            return Err(CampaignError::Config("shots must be at least 1".into()));
        }
        if self.calibration.shots < 1 {
            return Err(CampaignError::Config("calibration.shots must be at least 1".into()));
        }
        self.grid.validate()?;
        self.readout.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        self.mixture_noise().map_err(|e| CampaignError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn gate_model(&self) -> GateModel {
        GateModel {
            sqge: self.sqge.params(),
            entangler: match self.bias {
                None => Entangler::Cnot,
                Some(b) => Entangler::Biased { bias: b.params(), ordering: b.ordering, terms: b.terms },
            },
        }
    }

    pub fn mixture_noise(&self) -> Result<MixtureNoise, NoiseError> {
        match self.mixture {
            None => Ok(MixtureNoise::NONE),
            Some(m) => MixtureNoise::with_offset(m.eta, m.epsilon),
        }
    }
}

/// One executed grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignPoint {
    pub exec_order: usize,
    pub phi: f64,
    pub alpha: f64,
    pub counts: OutcomeCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: CampaignConfig,
    pub seed: u64,
    pub points: usize,
    pub batch_size: usize,
    pub mitigation_circuits_per_batch: usize,
    pub batches: usize,
    /// Hardware repetition time; documentation only.
    pub repetition_time_us: f64,
    pub version: String,
}

impl Manifest {
    pub fn for_config(config: &CampaignConfig, points: usize) -> Self {
        let per_batch = BATCH_SIZE - MITIGATION_CIRCUITS_PER_BATCH;
        Manifest {
            config: config.clone(),
            seed: config.seed,
            points,
            batch_size: BATCH_SIZE,
            mitigation_circuits_per_batch: MITIGATION_CIRCUITS_PER_BATCH,
            batches: points.div_ceil(per_batch),
            repetition_time_us: REPETITION_TIME_US,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Counts of every grid point (in grid order) plus calibration runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub config: CampaignConfig,
    pub points: Vec<CampaignPoint>,
    pub calibration: [OutcomeCounts; 4],
}

/// Execution position of every grid index.
pub fn execution_order(n: usize, order: SamplingOrder, seed: u64) -> Vec<usize> {
    match order {
        SamplingOrder::Grid => (0..n).collect(),
        SamplingOrder::Random => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut point_rng(seed, u64::MAX - 1));
            let mut pos = vec![0; n];
            for (k, &i) in perm.iter().enumerate() {
                pos[i] = k;
            }
            pos
        }
    }
}

/// Samples every grid point. Point `i` draws from RNG stream `i` of the seed,
/// so results do not depend on scheduling.
pub fn run_campaign(config: &CampaignConfig) -> Result<Campaign, CampaignError> {
    config.validate()?;
    let grid = config.grid.points(config.family);
    let sim = Simulator::new(&config.gate_model());
    let mixture = config.mixture_noise()?;
    let readout = config.readout;
    let exec = execution_order(grid.len(), config.order, config.seed);
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(phi, alpha))| {
            let p = readout.apply(&mixture.apply(&sim.probabilities(config.family, phi, alpha)));
            CampaignPoint {
                exec_order: exec[i],
                phi,
                alpha,
                counts: sample_probabilities(&p, config.shots, config.seed, i as u64),
            }
        })
        .collect();
    let calibration = calibration_counts(&readout, config.calibration.shots, config.seed, grid.len() as u64);
    Ok(Campaign { config: config.clone(), points, calibration })
}

/// An estimate row; `None` marks a degenerate point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub phi: f64,
    pub alpha: f64,
    pub exec_order: usize,
    pub observable: Observable,
    pub estimate: Option<Estimate>,
}

impl Campaign {
    pub fn mitigation(&self) -> Result<MitigationMatrix, NoiseError> {
        mitigation_matrix(&self.calibration)
    }

    /// Counts with readout mitigation applied.
    pub fn mitigated(&self) -> Result<Campaign, NoiseError> {
        let m = self.mitigation()?;
        let points = self.points.iter().map(|p| CampaignPoint { counts: m.mitigate_counts(&p.counts), ..*p }).collect();
        Ok(Campaign { config: self.config.clone(), points, calibration: self.calibration })
    }

    /// Estimates of every observable of the family, point-major in grid order.
    pub fn estimates(&self) -> Vec<EstimateRow> {
        let obs = self.config.family.observables();
        self.points
            .iter()
            .flat_map(|p| {
                obs.iter().map(move |&o| EstimateRow {
                    phi: p.phi,
                    alpha: p.alpha,
                    exec_order: p.exec_order,
                    observable: o,
                    estimate: estimators::estimate(o, &p.counts).ok(),
                })
            })
            .collect()
    }

    /// Fit dataset for `observable`; points with undefined estimates or zero
    /// standard error are left out.
    pub fn measurements(&self, observable: Observable) -> Vec<Measurement> {
        self.points
            .iter()
            .filter_map(|p| {
                let e = estimators::estimate(observable, &p.counts).ok()?;
                (e.std_error > 0.0 && e.value.is_finite()).then_some(Measurement {
                    phi: p.phi,
                    alpha: p.alpha,
                    exec_order: p.exec_order,
                    estimate: e,
                })
            })
            .collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), CampaignError> {
        fs::create_dir_all(dir).map_err(|e| CampaignError::io(dir, e))?;
        write_counts(&dir.join(COUNTS_FILE), &self.points)?;
        write_estimates(&dir.join(ESTIMATES_FILE), &self.estimates())?;
        write_calibration(&dir.join(CALIBRATION_FILE), &self.calibration)?;
        let manifest = Manifest::for_config(&self.config, self.points.len());
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CampaignError::io(&path, e))
    }

    /// Loads a dataset directory written by [`Campaign::write`].
    pub fn read(dir: &Path) -> Result<Campaign, CampaignError> {
        let mpath = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&mpath).map_err(|e| CampaignError::io(&mpath, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CampaignError::format(&mpath, e))?;
        let points = read_counts(&dir.join(COUNTS_FILE), manifest.seed)?;
        let calibration = read_calibration(&dir.join(CALIBRATION_FILE), manifest.seed)?;
        Ok(Campaign { config: manifest.config, points, calibration })
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CampaignError> {
    csv::Writer::from_path(path).map_err(|e| CampaignError::format(path, e))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CampaignError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| CampaignError::format(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CampaignError::format(path, e))?;
    }
    w.flush().map_err(|e| CampaignError::io(path, e))
}

pub fn write_counts(path: &Path, points: &[CampaignPoint]) -> Result<(), CampaignError> {
    write_rows(
        path,
        &["exec_order", "phi", "alpha", "n00", "n01", "n10", "n11", "S"],
        points.iter().map(|p| {
            let c = p.counts.counts;
            vec![
                p.exec_order.to_string(),
                p.phi.to_string(),
                p.alpha.to_string(),
                c[0].to_string(),
                c[1].to_string(),
                c[2].to_string(),
                c[3].to_string(),
                p.counts.shots.to_string(),
            ]
        }),
    )
}

pub fn write_estimates(path: &Path, rows: &[EstimateRow]) -> Result<(), CampaignError> {
    write_rows(
        path,
        &["phi", "alpha", "observable", "value", "std_error"],
        rows.iter().map(|r| {
            let (v, s) = r.estimate.map_or((f64::NAN, f64::NAN), |e| (e.value, e.std_error));
            vec![r.phi.to_string(), r.alpha.to_string(), r.observable.name().into(), v.to_string(), s.to_string()]
        }),
    )
}

pub fn write_calibration(path: &Path, cal: &[OutcomeCounts; 4]) -> Result<(), CampaignError> {
    write_rows(
        path,
        &["prepared", "n00", "n01", "n10", "n11", "S"],
        cal.iter().enumerate().map(|(t, c)| {
            let mut r = vec![format!("{:02b}", t)];
            r.extend(c.counts.iter().map(|n| n.to_string()));
            r.push(c.shots.to_string());
            r
        }),
    )
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>, CampaignError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CampaignError::format(path, e))?;
    r.records().collect::<Result<Vec<_>, _>>().map_err(|e| CampaignError::format(path, e))
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T, CampaignError> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CampaignError::format(path, format!("bad field {i} in record {:?}", rec)))
}

pub fn read_counts(path: &Path, seed: u64) -> Result<Vec<CampaignPoint>, CampaignError> {
    read_records(path)?
        .iter()
        .map(|rec| {
            let counts = [field(path, rec, 3)?, field(path, rec, 4)?, field(path, rec, 5)?, field(path, rec, 6)?];
            let shots: u64 = field(path, rec, 7)?;
            if counts.iter().sum::<u64>() != shots {
                return Err(CampaignError::format(path, "counts do not sum to S"));
            }
            Ok(CampaignPoint {
                exec_order: field(path, rec, 0)?,
                phi: field(path, rec, 1)?,
                alpha: field(path, rec, 2)?,
                counts: OutcomeCounts { counts, shots, seed },
            })
        })
        .collect()
}

pub fn read_calibration(path: &Path, seed: u64) -> Result<[OutcomeCounts; 4], CampaignError> {
    let recs = read_records(path)?;
    if recs.len() != 4 {
        return Err(CampaignError::format(path, "expected 4 calibration rows"));
    }
    let mut out = [OutcomeCounts::new([0; 4], seed); 4];
    for (k, rec) in recs.iter().enumerate() {
        let counts = [field(path, rec, 1)?, field(path, rec, 2)?, field(path, rec, 3)?, field(path, rec, 4)?];
        out[k] = OutcomeCounts { counts, shots: field(path, rec, 5)?, seed };
    }
    Ok(out)
}
