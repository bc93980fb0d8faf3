use std::f64::consts::{FRAC_PI_2, TAU};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use whichpath::analysis::slice_visibility;
use whichpath::campaign::{run_campaign, BiasSection, CampaignConfig, GridSpec};
use whichpath::circuits::{exact_probabilities, linspace, CircuitConfig, CircuitFamily, Observable, VisibilityMethod};
use whichpath::fitting::{fit, FitOptions, ModelSpec, Residual, Target, Tier};
use whichpath::gates::BiasParams;
use whichpath::noise::{sample_probabilities, OutcomeCounts};
use whichpath::stats::{bootstrap_std, residual_map, residual_map_of, runs_test, StatsError};

#[test]
fn runs_test_extremes() {
    let alternating: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let r = runs_test(&alternating).unwrap();
    assert_eq!(r.runs, 100);
    assert!(r.p_value < 1e-12 && r.rejects(0.05));
    let blocks: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { -1.0 }).collect();
    let r = runs_test(&blocks).unwrap();
    assert_eq!((r.runs, r.n_plus, r.n_minus), (2, 50, 50));
    assert!(r.p_value < 1e-12);
    let flat = runs_test(&[0.3; 30]).unwrap();
    assert!(flat.all_same_sign && flat.p_value == 0.0);
    assert!(matches!(runs_test(&[1.0; 5]), Err(StatsError::TooShort(5))));
}

#[test]
fn runs_test_holds_size_on_iid_noise() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let trials = 2000;
    let mut rejections = 0;
    for t in 0..trials {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(t);
        let v: Vec<f64> = (0..401).map(|_| normal.sample(&mut rng)).collect();
        let r = runs_test(&v).unwrap();
        assert!(r.runs >= 1 && r.runs <= r.n_plus + r.n_minus);
        if r.rejects(0.05) {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    assert!((0.03..=0.07).contains(&rate), "rate {rate}");
}

fn visibility_slice(shots: u64, seed: u64) -> (Vec<f64>, Vec<OutcomeCounts>) {
    let phis = linspace(0.0, TAU, 101);
    let counts = phis
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let p = exact_probabilities(&CircuitConfig::ideal(CircuitFamily::WpX, phi, FRAC_PI_2));
            sample_probabilities(&p, shots, seed, i as u64)
        })
        .collect();
    (phis, counts)
}

#[test]
fn bootstrap_of_degenerate_counts_is_zero() {
    let counts = vec![OutcomeCounts::new([100, 0, 0, 0], 0); 3];
    let s = bootstrap_std(&counts, |cs| cs[0].frequencies()[0], 200, 1).unwrap();
    assert_eq!(s, 0.0);
    assert!(matches!(bootstrap_std(&counts, |_| 0.0, 10, 1), Err(StatsError::TooFewResamples(10))));
}

#[test]
fn bootstrap_matches_repeated_experiments() {
    let method = VisibilityMethod::Sinusoid;
    let repeated: Vec<f64> = (0..200)
        .map(|s| {
            let (phis, counts) = visibility_slice(8192, 1000 + s);
            slice_visibility(&phis, &counts, method)
        })
        .collect();
    let mean = repeated.iter().sum::<f64>() / repeated.len() as f64;
    let truth = (repeated.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (repeated.len() - 1) as f64).sqrt();
    let (phis, counts) = visibility_slice(8192, 7);
    let boot = bootstrap_std(&counts, |cs| slice_visibility(&phis, cs, method), 1000, 3).unwrap();
    assert!((boot / truth - 1.0).abs() < 0.2, "bootstrap {boot} repeated {truth}");
}

#[test]
fn bootstrap_error_shrinks_as_inverse_root_shots() {
    let method = VisibilityMethod::Sinusoid;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for e in 10..=16 {
        let shots = 1u64 << e;
        let (phis, counts) = visibility_slice(shots, e);
        let s = bootstrap_std(&counts, |cs| slice_visibility(&phis, cs, method), 300, e).unwrap();
        xs.push((shots as f64).ln());
        ys.push(s.ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((-0.6..=-0.4).contains(&slope), "slope {slope}");
}

#[test]
fn bootstrap_is_deterministic_per_seed() {
    let (phis, counts) = visibility_slice(2048, 4);
    let f = |cs: &[OutcomeCounts]| slice_visibility(&phis, cs, VisibilityMethod::GridExtrema);
    assert_eq!(bootstrap_std(&counts, f, 150, 9).unwrap(), bootstrap_std(&counts, f, 150, 9).unwrap());
}

#[test]
fn zero_residual_map() {
    let pts: Vec<Residual> = (0..9)
        .map(|i| Residual { phi: i as f64, alpha: 0.0, exec_order: i, residual: 0.0, sigma: 0.1 })
        .collect();
    let m = residual_map_of(&pts);
    assert!(m.points.iter().all(|r| r.residual == 0.0));
    assert_eq!((m.min, m.max), (0.0, 0.0));
    let mut buf = Vec::new();
    m.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("phi,alpha,residual\n"));
    assert!(text.ends_with("min,,0\nmax,,0\n"));
}

#[test]
fn residual_structure_separates_models() {
    let mut cfg = CampaignConfig::new(CircuitFamily::EraserX);
    cfg.grid = GridSpec::square(21);
    cfg.seed = 12;
    cfg.bias = Some(BiasSection::from_params(&BiasParams::new([-0.004, -0.027, 0.238, -0.065, 0.023])));
    let data = run_campaign(&cfg).unwrap().measurements(Observable::X0);
    let ideal = fit(&ModelSpec::new(Target::X0, Tier::Ideal), &data, &FitOptions::default()).unwrap();
    assert!(runs_test(&residual_map(&ideal).grid_ordered()).unwrap().p_value < 0.01);

    let mut clean = CampaignConfig::new(CircuitFamily::EraserX);
    clean.grid = GridSpec::square(21);
    clean.seed = 12;
    let data = run_campaign(&clean).unwrap().measurements(Observable::X0);
    let ideal = fit(&ModelSpec::new(Target::X0, Tier::Ideal), &data, &FitOptions::default()).unwrap();
    assert!(!runs_test(&ideal.residuals_by_exec_order()).unwrap().rejects(0.05));
}

proptest! {
    #[test]
    fn runs_statistic_ignores_positive_scaling(v in proptest::collection::vec(-10.0f64..10.0, 20..200), c in 1e-3f64..1e3) {
        let a = runs_test(&v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        let b = runs_test(&scaled).unwrap();
        prop_assume!(!a.all_same_sign);
        prop_assert_eq!((a.runs, a.n_plus, a.n_minus), (b.runs, b.n_plus, b.n_minus));
        prop_assert!((a.z - b.z).abs() < 1e-9);
    }
}
