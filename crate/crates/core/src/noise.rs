//! Shot sampling, readout confusion, incoherent mixing and readout-error
//! mitigation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{CircuitConfig, Simulator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("calibration matrix is singular (|det| = {det:e})")]
    SingularCalibration { det: f64 },
    #[error("calibration needs one count record per basis state with S > 0")]
    InvalidCalibration,
    #[error("probability parameter {name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("mixture offset |ε| = {epsilon} exceeds 1 − η = {limit}")]
    InvalidMixture { epsilon: f64, limit: f64 },
}

/// Independent per-qubit readout flips.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// `p(read 1 | 0)` for the interferometer qubit.
    #[serde(default)]
    pub qi_p10: f64,
    /// `p(read 0 | 1)` for the interferometer qubit.
    #[serde(default)]
    pub qi_p01: f64,
    #[serde(default)]
    pub qd_p10: f64,
    #[serde(default)]
    pub qd_p01: f64,
}

impl ReadoutModel {
    pub const IDEAL: ReadoutModel = ReadoutModel { qi_p10: 0.0, qi_p01: 0.0, qd_p10: 0.0, qd_p01: 0.0 };

    pub fn symmetric(flip: f64) -> Self {
        ReadoutModel { qi_p10: flip, qi_p01: flip, qd_p10: flip, qd_p01: flip }
    }

    /// Readout on the interferometer qubit only that maps `⟨X⟩ ↦ η⟨X⟩ + ε`.
    pub fn from_contrast(eta: f64, epsilon: f64) -> Result<Self, NoiseError> {
        let sum = 1.0 - eta;
        let m = ReadoutModel { qi_p10: 0.5 * (sum - epsilon), qi_p01: 0.5 * (sum + epsilon), ..Self::IDEAL };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in
            [("qi_p10", self.qi_p10), ("qi_p01", self.qi_p01), ("qd_p10", self.qd_p10), ("qd_p01", self.qd_p01)]
        {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::InvalidProbability { name, value });
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        *self == Self::IDEAL
    }

    /// Column-stochastic `A[read][true]` over `|xy⟩`.
    pub fn confusion_matrix(&self) -> [[f64; 4]; 4] {
        let qi = [[1.0 - self.qi_p10, self.qi_p01], [self.qi_p10, 1.0 - self.qi_p01]];
        let qd = [[1.0 - self.qd_p10, self.qd_p01], [self.qd_p10, 1.0 - self.qd_p01]];
        let mut a = [[0.0; 4]; 4];
        for (r, row) in a.iter_mut().enumerate() {
            for (t, v) in row.iter_mut().enumerate() {
                *v = qi[r >> 1][t >> 1] * qd[r & 1][t & 1];
            }
        }
        a
    }

    pub fn apply(&self, p: &[f64; 4]) -> [f64; 4] {
        mat_vec(&self.confusion_matrix(), p)
    }
}

/// Incoherent admixture `p ↦ η p + (1 − η) q` of a fixed outcome distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureNoise {
    pub eta: f64,
    pub background: [f64; 4],
}

impl MixtureNoise {
    pub const NONE: MixtureNoise = MixtureNoise { eta: 1.0, background: [0.25; 4] };

    /// White-noise background.
    pub fn depolarizing(eta: f64) -> Self {
        MixtureNoise { eta, background: [0.25; 4] }
    }

    /// Background whose interferometer marginal shifts `⟨X⟩` by `ε`, so that
    /// `⟨X⟩ ↦ η⟨X⟩ + ε`.
    pub fn with_offset(eta: f64, epsilon: f64) -> Result<Self, NoiseError> {
        let limit = 1.0 - eta;
        if !(0.0..=1.0).contains(&eta) {
            return Err(NoiseError::InvalidProbability { name: "eta", value: eta });
        }
        if epsilon.abs() > limit + 1e-15 {
            return Err(NoiseError::InvalidMixture { epsilon, limit });
        }
        let q0 = if limit > 0.0 { 0.5 * (1.0 + epsilon / limit) } else { 0.5 };
        let q1 = 1.0 - q0;
        Ok(MixtureNoise { eta, background: [0.5 * q0, 0.5 * q0, 0.5 * q1, 0.5 * q1] })
    }

    pub fn apply(&self, p: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|k| self.eta * p[k] + (1.0 - self.eta) * self.background[k])
    }
}

impl Default for MixtureNoise {
    fn default() -> Self {
        Self::NONE
    }
}

/// Shot tallies of one circuit execution point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub counts: [u64; 4],
    pub shots: u64,
    pub seed: u64,
}

impl OutcomeCounts {
    pub fn new(counts: [u64; 4], seed: u64) -> Self {
        OutcomeCounts { counts, shots: counts.iter().sum(), seed }
    }

    pub fn frequencies(&self) -> [f64; 4] {
        let s = self.shots as f64;
        self.counts.map(|n| n as f64 / s)
    }
}

/// RNG for stream `stream` of a campaign seeded with `seed`.
pub fn point_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_multinomial<R: rand::Rng + ?Sized>(p: &[f64; 4], shots: u64, rng: &mut R) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut remaining = shots;
    let mut mass = 1.0;
    for k in 0..3 {
        if remaining == 0 {
            break;
        }
        let pk = p[k].max(0.0);
        let q = if mass > 0.0 { (pk / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(remaining, q).expect("probability clamped to [0,1]").sample(rng);
        out[k] = n;
        remaining -= n;
        mass -= pk;
    }
    out[3] = remaining;
    out
}

/// Exact probabilities of `c` with mixture and readout noise applied.
pub fn noisy_probabilities(c: &CircuitConfig, mixture: &MixtureNoise, readout: &ReadoutModel) -> [f64; 4] {
    let sim = Simulator::new(&c.gates);
    readout.apply(&mixture.apply(&sim.probabilities(c.family, c.phi, c.alpha)))
}

/// Samples `shots` outcomes of `c` through `readout`.
pub fn sample(c: &CircuitConfig, shots: u64, readout: &ReadoutModel, seed: u64) -> OutcomeCounts {
    sample_probabilities(&noisy_probabilities(c, &MixtureNoise::NONE, readout), shots, seed, 0)
}

/// Samples from a given outcome distribution on stream `stream` of `seed`.
pub fn sample_probabilities(p: &[f64; 4], shots: u64, seed: u64, stream: u64) -> OutcomeCounts {
    let mut rng = point_rng(seed, stream);
    OutcomeCounts { counts: sample_multinomial(p, shots, &mut rng), shots, seed }
}

/// Calibration runs preparing `|00⟩, |01⟩, |10⟩, |11⟩` under `readout`.
pub fn calibration_counts(readout: &ReadoutModel, shots: u64, seed: u64, stream_base: u64) -> [OutcomeCounts; 4] {
    let a = readout.confusion_matrix();
    std::array::from_fn(|t| {
        let col = [a[0][t], a[1][t], a[2][t], a[3][t]];
        sample_probabilities(&col, shots, seed, stream_base + t as u64)
    })
}

/// Estimated column-stochastic confusion matrix with a precomputed inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationMatrix {
    pub estimate: [[f64; 4]; 4],
    inverse: [[f64; 4]; 4],
}

/// Smallest `|det Â|` accepted as invertible.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Builds `Â` from calibration counts; column `t` is the frequency vector
/// measured after preparing basis state `t`.
pub fn mitigation_matrix(calibration: &[OutcomeCounts; 4]) -> Result<MitigationMatrix, NoiseError> {
    let mut estimate = [[0.0; 4]; 4];
    for (t, c) in calibration.iter().enumerate() {
        if c.shots == 0 {
            return Err(NoiseError::InvalidCalibration);
        }
        let f = c.frequencies();
        for r in 0..4 {
            estimate[r][t] = f[r];
        }
    }
    let m = nalgebra::Matrix4::from_fn(|r, c| estimate[r][c]);
    let det = m.determinant();
    if !det.is_finite() || det.abs() < SINGULAR_TOL {
        return Err(NoiseError::SingularCalibration { det });
    }
    let inv = m.try_inverse().ok_or(NoiseError::SingularCalibration { det })?;
    let inverse = std::array::from_fn(|r| std::array::from_fn(|c| inv[(r, c)]));
    Ok(MitigationMatrix { estimate, inverse })
}

impl MitigationMatrix {
    pub fn identity() -> Self {
        let mut e = [[0.0; 4]; 4];
        for (k, row) in e.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        MitigationMatrix { estimate: e, inverse: e }
    }

    pub fn inverse(&self) -> &[[f64; 4]; 4] {
        &self.inverse
    }

    /// `Â⁻¹ f` without projection.
    pub fn unmix(&self, f: &[f64; 4]) -> [f64; 4] {
        mat_vec(&self.inverse, f)
    }

    /// `Â⁻¹ f` projected back onto the simplex by truncating negatives and
    /// renormalizing.
    pub fn mitigate(&self, f: &[f64; 4]) -> [f64; 4] {
        project_simplex(&self.unmix(f))
    }

    /// Mitigated counts with the same shot total, rounded to the nearest
    /// integers while preserving the sum.
    pub fn mitigate_counts(&self, c: &OutcomeCounts) -> OutcomeCounts {
        let p = self.mitigate(&c.frequencies());
        OutcomeCounts { counts: round_preserving_sum(&p, c.shots), shots: c.shots, seed: c.seed }
    }
}

fn project_simplex(v: &[f64; 4]) -> [f64; 4] {
    let clipped = v.map(|x| x.max(0.0));
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return [0.25; 4];
    }
    clipped.map(|x| x / total)
}

/// Largest-remainder rounding of `p · shots`.
fn round_preserving_sum(p: &[f64; 4], shots: u64) -> [u64; 4] {
    let scaled = p.map(|x| x * shots as f64);
    let mut out = scaled.map(|x| x.floor() as u64);
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(shots.saturating_sub(assigned) as usize) {
        out[k] += 1;
    }
    out
}

fn mat_vec(a: &[[f64; 4]; 4], p: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|r| (0..4).map(|t| a[r][t] * p[t]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::CircuitFamily;

    #[test]
    fn deterministic_outcome_fills_one_bin() {
        let mut rng = point_rng(3, 0);
        assert_eq!(sample_multinomial(&[1.0, 0.0, 0.0, 0.0], 1000, &mut rng), [1000, 0, 0, 0]);
        let mut rng = point_rng(3, 1);
        assert_eq!(sample_multinomial(&[0.0, 0.0, 0.0, 1.0], 17, &mut rng), [0, 0, 0, 17]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = CircuitConfig::ideal(CircuitFamily::WpX, 0.7, 1.1);
        let r = ReadoutModel::symmetric(0.03);
        assert_eq!(sample(&c, 8192, &r, 11), sample(&c, 8192, &r, 11));
        assert_ne!(sample(&c, 8192, &r, 11).counts, sample(&c, 8192, &r, 12).counts);
    }

    #[test]
    fn counts_sum_to_shots() {
        let c = CircuitConfig::ideal(CircuitFamily::EraserX, 2.0, 0.4);
        let oc = sample(&c, 999, &ReadoutModel::IDEAL, 5);
        assert_eq!(oc.counts.iter().sum::<u64>(), 999);
        assert_eq!(oc.shots, 999);
    }

    #[test]
    fn confusion_is_column_stochastic() {
        let r = ReadoutModel { qi_p10: 0.01, qi_p01: 0.04, qd_p10: 0.02, qd_p01: 0.07 };
        let a = r.confusion_matrix();
        for t in 0..4 {
            let s: f64 = (0..4).map(|k| a[k][t]).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!((ReadoutModel::symmetric(0.02).apply(&[1.0, 0.0, 0.0, 0.0])[0] - 0.9604).abs() < 1e-15);
    }

    #[test]
    fn contrast_readout_maps_x() {
        let r = ReadoutModel::from_contrast(0.98581, 0.00519).unwrap();
        let p = [0.3, 0.1, 0.2, 0.4];
        let x = p[0] + p[1] - p[2] - p[3];
        let q = r.apply(&p);
        let xq = q[0] + q[1] - q[2] - q[3];
        assert!((xq - (0.98581 * x + 0.00519)).abs() < 1e-15);
        assert!(ReadoutModel::from_contrast(0.99, 0.2).is_err());
    }

    #[test]
    fn offset_mixture_maps_x() {
        let m = MixtureNoise::with_offset(0.9, -0.04).unwrap();
        let p = [0.5, 0.0, 0.1, 0.4];
        let q = m.apply(&p);
        let x = |v: &[f64; 4]| v[0] + v[1] - v[2] - v[3];
        assert!((x(&q) - (0.9 * x(&p) - 0.04)).abs() < 1e-15);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(MixtureNoise::with_offset(0.95, 0.2).is_err());
    }

    #[test]
    fn perfect_calibration_is_identity() {
        let cal = calibration_counts(&ReadoutModel::IDEAL, 100, 1, 0);
        let m = mitigation_matrix(&cal).unwrap();
        assert_eq!(m.estimate, MitigationMatrix::identity().estimate);
    }

    #[test]
    fn singular_calibration_rejected() {
        let c = OutcomeCounts::new([10, 0, 0, 0], 0);
        assert!(matches!(mitigation_matrix(&[c; 4]), Err(NoiseError::SingularCalibration { .. })));
    }

    #[test]
    fn mitigation_projects_to_simplex() {
        let m = mitigation_matrix(&calibration_counts(&ReadoutModel::symmetric(0.1), 4096, 2, 0)).unwrap();
        let out = m.mitigate(&[1.0, 0.0, 0.0, 0.0]);
        assert!(out.iter().all(|&x| x >= 0.0));
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rounding_preserves_total() {
        assert_eq!(round_preserving_sum(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0], 10).iter().sum::<u64>(), 10);
    }
}
