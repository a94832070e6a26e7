//! Parallel vs sequential throughput of the parameter maps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use photon_pair::scenarios::{chiral_chain, square_array, DETUNING_PARAM};
use photon_pair::sweep::{map_g2_tau, map_g2_zero, Axis, Parallelism};

fn bench_g2_zero_map(c: &mut Criterion) {
    let scenario = square_array(0.1, 0.25 * std::f64::consts::PI).unwrap();
    let detuning = Axis::linspace_step(DETUNING_PARAM, -8.0, 8.0, 0.25).unwrap();
    let theta = Axis::linspace_step("theta", 0.0, 3.1, 0.2).unwrap();

    let mut group = c.benchmark_group("map_g2_zero");
    for (label, parallelism) in [
        ("sequential", Parallelism::Sequential),
        ("rayon", Parallelism::Rayon),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallelism, |b, &p| {
            b.iter(|| map_g2_zero(&scenario, &theta, &detuning, p).unwrap())
        });
    }
    group.finish();
}

fn bench_g2_tau_map(c: &mut Criterion) {
    let scenario = chiral_chain(5, 0.22, 0.01, 0.1).unwrap();
    let detuning = Axis::linspace_step(DETUNING_PARAM, -1.0, 1.0, 0.02).unwrap();
    let tau: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.02).collect();
    let tau = Axis::new("tau", tau);

    let mut group = c.benchmark_group("map_g2_tau");
    for (label, parallelism) in [
        ("sequential", Parallelism::Sequential),
        ("rayon", Parallelism::Rayon),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallelism, |b, &p| {
            b.iter(|| map_g2_tau(&scenario, &detuning, &tau, p).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_g2_zero_map, bench_g2_tau_map);
criterion_main!(benches);
