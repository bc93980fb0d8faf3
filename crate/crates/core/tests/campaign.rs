use std::f64::consts::TAU;
use std::fs;

use proptest::prelude::*;
use whichpath::analysis::{run_analysis, write_report, AnalysisConfig};
use whichpath::campaign::{
    execution_order, run_campaign, Campaign, CampaignConfig, GridSpec, Manifest, SamplingOrder, COUNTS_FILE,
    ESTIMATES_FILE, MANIFEST_FILE,
};
use whichpath::circuits::{CircuitFamily, Observable, VisibilityMethod};
use whichpath::fitting::{Target, Tier};
use whichpath::noise::ReadoutModel;

fn small(family: CircuitFamily, n: usize, seed: u64) -> CampaignConfig {
    CampaignConfig { grid: GridSpec::square(n), seed, ..CampaignConfig::new(family) }
}

#[test]
fn default_contrast_campaign_follows_theory() {
    let c = run_campaign(&CampaignConfig { seed: 1, ..CampaignConfig::new(CircuitFamily::WpX) }).unwrap();
    assert_eq!(c.points.len(), 101 * 101);
    let rows = c.estimates();
    let inside = rows
        .iter()
        .filter(|r| {
            let e = r.estimate.unwrap();
            let exact = (r.phi.cos() + (r.phi + r.alpha).cos()) / 2.0;
            (e.value - exact).abs() <= 5.0 * e.std_error
        })
        .count();
    assert!(inside as f64 >= 0.99 * rows.len() as f64, "{inside}/{}", rows.len());
}

#[test]
fn eraser_z_campaign_shows_no_which_path_information() {
    let c = run_campaign(&small(CircuitFamily::EraserZ, 51, 2)).unwrap();
    let ests: Vec<_> = c.estimates().into_iter().filter_map(|r| r.estimate).collect();
    let inside = ests.iter().filter(|e| e.value.abs() < 4.0 * e.std_error).count();
    assert!(inside as f64 >= 0.99 * ests.len() as f64, "{inside}/{}", ests.len());
}

#[test]
fn single_qubit_campaign_shape() {
    let mut cfg = CampaignConfig::new(CircuitFamily::Mzi);
    cfg.grid.phi_points = 401;
    let c = run_campaign(&cfg).unwrap();
    assert_eq!(c.points.len(), 401);
    assert!(c.points.iter().all(|p| p.alpha == 0.0 && p.counts.shots == 8192));
    assert!(c.points.iter().all(|p| p.counts.counts[1] == 0 && p.counts.counts[3] == 0));
    // points at or next to the extrema can record a single outcome, leaving σ = 0
    let m = c.measurements(Observable::X);
    assert!((390..=398).contains(&m.len()), "{}", m.len());
    assert!(m.iter().all(|d| d.estimate.std_error > 0.0));
}

#[test]
fn dataset_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(CircuitFamily::EraserX, 9, 5);
    cfg.readout = ReadoutModel::symmetric(0.02);
    let c = run_campaign(&cfg).unwrap();
    c.write(dir.path()).unwrap();
    let counts = fs::read_to_string(dir.path().join(COUNTS_FILE)).unwrap();
    assert!(counts.starts_with("exec_order,phi,alpha,n00,n01,n10,n11,S\n"));
    let est = fs::read_to_string(dir.path().join(ESTIMATES_FILE)).unwrap();
    assert!(est.starts_with("phi,alpha,observable,value,std_error\n"));
    assert_eq!(est.lines().count(), 1 + 81 * 3);
    let back = Campaign::read(dir.path()).unwrap();
    assert_eq!(back, c);
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest.config, cfg);
    assert_eq!(manifest.points, 81);
    assert_eq!(manifest.batches, 1);
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = small(CircuitFamily::WpZ, 15, 77);
    cfg.readout = ReadoutModel::from_contrast(0.97, 0.01).unwrap();
    run_campaign(&cfg).unwrap().write(a.path()).unwrap();
    let again = CampaignConfig::load(&a.path().join(MANIFEST_FILE)).unwrap();
    run_campaign(&again).unwrap().write(b.path()).unwrap();
    for f in [ESTIMATES_FILE, COUNTS_FILE, MANIFEST_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let cfg = small(CircuitFamily::WpX, 21, 3);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_campaign(&cfg).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_campaign(&cfg).unwrap());
    assert_eq!(serial, parallel);
}

#[test]
fn grid_outside_period_is_rejected() {
    let mut cfg = small(CircuitFamily::WpX, 5, 0);
    cfg.grid.alpha_max = 2.0 * TAU;
    assert!(run_campaign(&cfg).is_err());
}

#[test]
fn ideal_data_selects_ideal_tier() {
    let c = run_campaign(&small(CircuitFamily::WpX, 15, 4)).unwrap();
    let cfg = AnalysisConfig { tiers: vec![Tier::Ideal, Tier::CnotSqge], starts: 4, ..AnalysisConfig::default() };
    let report = run_analysis(&[c], &cfg).unwrap();
    let t = &report.targets[0];
    assert_eq!(t.target, Target::X);
    let ideal = &t.tiers[0].cv;
    let sqge = &t.tiers[1].cv;
    assert!(ideal.chi2_red <= sqge.chi2_red + ideal.chi2_red_se.max(sqge.chi2_red_se));
    assert_eq!(t.selected, Some(Tier::Ideal));
}

#[test]
fn duality_export_on_ideal_data() {
    let grid = GridSpec { phi_points: 101, alpha_points: 51, ..GridSpec::default() };
    let x = run_campaign(&CampaignConfig { grid, seed: 6, ..CampaignConfig::new(CircuitFamily::WpX) }).unwrap();
    let d = run_campaign(&CampaignConfig { grid, seed: 7, ..CampaignConfig::new(CircuitFamily::WpZ) }).unwrap();
    let cfg = AnalysisConfig {
        tiers: vec![Tier::Ideal],
        bootstrap: 300,
        visibility: VisibilityMethod::Sinusoid,
        ..AnalysisConfig::default()
    };
    let report = run_analysis(&[x, d], &cfg).unwrap();
    assert_eq!(report.duality.len(), 51);
    for row in &report.duality {
        assert!((row.sum - 1.0).abs() <= 3.0 * row.sum_se, "{row:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    write_report(&report, dir.path()).unwrap();
    for f in ["scores.csv", "params.csv", "runs.csv", "duality.csv", "report.json", "residuals_x_ideal.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

proptest! {
    #[test]
    fn execution_order_is_a_permutation(n in 1usize..3000, seed in any::<u64>()) {
        for order in [SamplingOrder::Random, SamplingOrder::Grid] {
            let mut o = execution_order(n, order, seed);
            o.sort_unstable();
            prop_assert!(o.iter().copied().eq(0..n));
        }
    }

    #[test]
    fn manifest_round_trips(seed in any::<u64>(), n in 2usize..40, shots in 1u64..100_000, flip in 0.0f64..0.3) {
        let mut cfg = small(CircuitFamily::EraserZ, n, seed);
        cfg.shots = shots;
        cfg.readout = ReadoutModel::symmetric(flip);
        let m = Manifest::for_config(&cfg, n * n);
        let back: Manifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}
