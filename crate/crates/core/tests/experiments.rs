use std::sync::Arc;

use hullshape::experiments::{self, run_hull, ExperimentConfig};
use hullshape::geometry::{hull_2d_flat, DirectionGrid, Functional};
use hullshape::models::{builtin_model, ModelSpec, TimeGrid};
use hullshape::oracle::SupLaw;
use hullshape::rng::SeedSpec;
use hullshape::sampling::sample_paths;

fn planar(q: usize) -> Arc<DirectionGrid> {
    Arc::new(DirectionGrid::planar(q).unwrap())
}

#[test]
fn hulls_nest_along_a_shared_stream() {
    let dirs = planar(180);
    for name in ["bm", "fbm:H=0.3", "fbb:H=0.75"] {
        let m = builtin_model(name, 2).unwrap();
        let seed = SeedSpec::new(11, 3);
        let mut prev: Option<Vec<f64>> = None;
        for n in [2, 20, 200, 2000] {
            let run = run_hull(&m, 128, n, seed, &dirs).unwrap();
            let v = run.raw.profile.values().to_vec();
            if let Some(p) = prev {
                assert!(p.iter().zip(&v).all(|(a, b)| a <= b), "{name} n={n}");
            }
            prev = Some(v);
        }
    }
}

#[test]
fn scaled_hull_is_hull_of_scaled_points() {
    let m = builtin_model("fbb:H=0.5", 2).unwrap();
    let seed = SeedSpec::new(4, 4);
    let n = 500;
    let batch = sample_paths(&m, &TimeGrid::uniform(50).unwrap(), n, seed).unwrap();
    let run = run_hull(&m, 50, n as u64, seed, &planar(90)).unwrap();
    let c = experiments::normalization(n as u64);
    let scaled: Vec<f64> = batch.values.iter().map(|v| c * v).collect();
    assert_eq!(run.scaled.polygon.unwrap(), hull_2d_flat(&scaled).unwrap());
}

#[test]
fn three_dimensional_profiles() {
    let m = builtin_model("bm", 3).unwrap();
    let dirs = Arc::new(DirectionGrid::fibonacci(200).unwrap());
    let run = run_hull(&m, 128, 5000, SeedSpec::new(1, 1), &dirs).unwrap();
    assert!(run.raw.polygon.is_none());
    // Each direction has the law of max of 5000 |N| over sqrt(2 ln 5000):
    // mean about 0.93, sd about 0.07. Over 200 directions the extremes stay
    // within five sd.
    let v = run.scaled.profile.values();
    assert!(v.iter().all(|x| (0.6..1.3).contains(x)), "{:?}", (run.scaled.profile.min_value(), run.scaled.profile.max_value()));
}

#[test]
fn bridge_hull_approaches_half_ball() {
    // The normalized bridge supremum has mean 0.5117 and sd 0.0266 at n = 10^5,
    // so every direction sits within a few hundredths of 0.5.
    let cfg = ExperimentConfig {
        model: ModelSpec::Fbb { hurst: 0.5 },
        grid_points: 256,
        n_schedule: vec![100, 100_000],
        replications: Some(4),
        directions: 360,
        ..ExperimentConfig::default()
    };
    let records = experiments::run_convergence(&cfg).unwrap();
    assert!(records[1].coarse.mean < 0.15, "{}", records[1].coarse.mean);
    assert!(records[1].coarse.mean < records[0].coarse.mean);
}

#[test]
fn singleton_rate_follows_the_normal_oracle() {
    // ρ_n >= 1 - Z_n for the direction +1, so E ρ_n >= 1 - E Z_n.
    let cfg = ExperimentConfig {
        model: ModelSpec::Singleton { variance: 1.0 },
        dim: 1,
        grid_points: 1,
        n_schedule: vec![100, 1_000, 10_000],
        replications: Some(64),
        directions: 2,
        ..ExperimentConfig::default()
    };
    let records = experiments::run_convergence(&cfg).unwrap();
    let law = SupLaw::Normal { sd: 1.0 };
    let mut oracle_rates = Vec::new();
    for r in &records {
        let z = law.max_of(r.n).normalized();
        assert!(r.coarse.mean >= 1.0 - z.mean - 3.0 * r.coarse.se, "n={}", r.n);
        oracle_rates.push((r.n as f64).ln().sqrt() * (1.0 - z.mean));
    }
    assert!(oracle_rates.windows(2).all(|w| w[1] < w[0]));
    let rates = experiments::rate_series(&records);
    assert!(rates[2].rate < rates[0].rate);
}

#[test]
fn two_resolution_records() {
    let cfg = ExperimentConfig {
        grid_points: 32,
        n_schedule: vec![50, 500],
        replications: Some(4),
        directions: 720,
        two_resolution: true,
        ..ExperimentConfig::default()
    };
    let sim = experiments::simulate(&cfg, None).unwrap();
    assert!(experiments::all_passed(&experiments::simulation_checks(&sim)));
    let records = experiments::convergence_records(&sim);
    for r in &records {
        let fine = r.fine.as_ref().unwrap();
        assert_eq!(fine.grid_points, 64);
        assert_eq!(fine.rho.len(), 4);
        assert!(fine.mean_support >= r.coarse.mean_support);
        assert!(r.resolution_gap.unwrap() >= 0.0);
    }
    let per = experiments::moment_records(&sim, Functional::Perimeter, 2).unwrap();
    assert!((per[0].target - (2.0 * std::f64::consts::PI).powi(2)).abs() < 1e-12);
    assert!(per.iter().all(|r| r.fine.as_ref().unwrap().estimate >= r.coarse.estimate));
}

#[test]
fn extremes_of_one_dimensional_bm_match_reflection_oracle() {
    let cfg = ExperimentConfig {
        dim: 1,
        grid_points: 1024,
        n_schedule: vec![10, 1000],
        replications: Some(200),
        directions: 2,
        seed: 5,
        ..ExperimentConfig::default()
    };
    for r in experiments::run_extremes(&cfg, &[1.0]).unwrap() {
        let o = r.oracle.unwrap();
        assert!((r.coarse.mean - o.mean).abs() <= 3.0 * r.coarse.se, "n={}: {} vs {}", r.n, r.coarse.mean, o.mean);
        assert_eq!(r.target, 1.0);
        assert_eq!(r.coarse.z.len(), 200);
    }
    assert!(experiments::run_extremes(&cfg, &[0.5]).is_err());
}
