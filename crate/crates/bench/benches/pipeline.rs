use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use expose_core::exposure::{aggregate_ei, SarTable, Stratification};
use expose_core::fitting::{fit_gev, fit_scaled_beta, ks_test, FitOptions, SupportRule};
use expose_core::link::{evaluate_link, RadioConfig};
use expose_core::model::presets::{far_model, near_model, reference_model, Band};
use expose_core::scenario::{evaluate_observation, observation_rng, sample_user, simulate};
use expose_core::{OccupancyProfile, Scenario, ScenarioGeometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario() -> Scenario {
    Scenario {
        geometry: ScenarioGeometry::default(),
        occupancy: OccupancyProfile::default(),
        model: reference_model(Band::Lte2600),
        radio: RadioConfig::small_cell(Band::Lte2600.frequency_band()),
    }
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, model) in [("gev", near_model(Band::Lte2600)), ("beta", far_model(Band::Lte2600))] {
        g.bench_function(name, |b| b.iter(|| model.sample(&mut rng)));
    }
    g.finish();
}

fn observation(c: &mut Criterion) {
    let s = scenario();
    let cfg = s.radio;
    c.bench_function("evaluate_link", |b| b.iter(|| evaluate_link(&cfg, black_box(104.2), 100)));
    let mut i = 0u64;
    c.bench_function("observation", |b| {
        b.iter(|| {
            i += 1;
            let mut rng = observation_rng(7, i);
            let p = sample_user(&s.geometry, &s.occupancy, &mut rng);
            evaluate_observation(p, &s, &mut rng).unwrap()
        })
    });
}

fn fitting(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    let opts = FitOptions::default();
    for n in [2_000usize, 20_000] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let near = near_model(Band::Lte1800);
        let far = far_model(Band::Lte2600);
        let gev_data: Vec<f64> = (0..n).map(|_| near.sample(&mut rng)).collect();
        let beta_data: Vec<f64> = (0..n).map(|_| far.sample(&mut rng)).collect();
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("gev", n), &gev_data, |b, d| b.iter(|| fit_gev(d, &opts).unwrap()));
        g.bench_with_input(BenchmarkId::new("beta_fixed", n), &beta_data, |b, d| {
            let rule = SupportRule::Fixed { lower: 0.0, upper: 5.0 };
            b.iter(|| fit_scaled_beta(d, rule, &opts).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("beta_profile", n), &beta_data, |b, d| {
            b.iter(|| fit_scaled_beta(d, SupportRule::ProfileMle, &opts).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("ks", n), &gev_data, |b, d| b.iter(|| ks_test(d, &near).unwrap()));
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let s = scenario();
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for n in [10_000usize, 100_000] {
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("simulate", n), &n, |b, &n| b.iter(|| simulate(&s, n, 3).unwrap()));
    }
    let obs = simulate(&s, 100_000, 3).unwrap();
    let sar = SarTable::default().lookup(2600.0, &s.occupancy).unwrap().clone();
    g.bench_function("aggregate_100000", |b| {
        b.iter(|| aggregate_ei(&obs, &sar, &s.radio.band, &s.occupancy, Stratification::Environment).unwrap())
    });
    g.finish();
}

criterion_group!(benches, sampling, observation, fitting, monte_carlo);
criterion_main!(benches);
