use std::hint::black_box;

use clusterbandit::bounds::eq1_lower_bound;
use clusterbandit::clustering::{kmeans, lloyd, DEFAULT_MAX_ITERS};
use clusterbandit::env::{generate_arrivals, run_experiment, AlgorithmSpec, ArrivalConfig, TraceOptions};
use clusterbandit::presets::{fig1_parameter_set, fig2_parameter_set};
use clusterbandit::{kt_select, ArmStats, KtPolicyConfig};
use clusterbandit_bench::{pilot_points, sample_stats};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_kmeans(c: &mut Criterion) {
    let mut group = c.benchmark_group("kmeans");
    for users in [40, 400, 2000] {
        let points = pilot_points(users, 100, 1);
        group.bench_with_input(BenchmarkId::new("restarts", users), &points, |b, p| {
            b.iter(|| kmeans(black_box(p), 2, 7, DEFAULT_MAX_ITERS).unwrap())
        });
        let start = kmeans(&points, 2, 7, DEFAULT_MAX_ITERS).unwrap().centers;
        group.bench_with_input(BenchmarkId::new("warm", users), &points, |b, p| {
            b.iter(|| lloyd(black_box(p), start.clone(), DEFAULT_MAX_ITERS).unwrap())
        });
    }
    group.finish();
}

fn bench_kt_select(c: &mut Criterion) {
    let params = fig1_parameter_set();
    let config = KtPolicyConfig::exact(params.clone(), 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let stats: ArmStats = sample_stats(&params, 0, 2000, &mut rng);
    c.bench_function("kt_select/21x21", |b| b.iter(|| kt_select(black_box(&stats), &config).unwrap()));
}

fn bench_eq1(c: &mut Criterion) {
    let params = fig1_parameter_set();
    c.bench_function("eq1/21x21", |b| b.iter(|| eq1_lower_bound(black_box(&params), 0).unwrap()));
}

fn bench_runs(c: &mut Criterion) {
    let params = fig2_parameter_set();
    let arrivals = generate_arrivals(
        &ArrivalConfig {
            num_users: 100,
            tau: 100,
            type_probs: vec![0.5, 0.5],
        },
        1,
    )
    .unwrap();
    let mut group = c.benchmark_group("run_100_users");
    group.sample_size(10);
    for spec in [
        AlgorithmSpec::Ucb { elite_only: false },
        AlgorithmSpec::UnifClusteringEt { m0: 40, delta: 0.01 },
        AlgorithmSpec::ContinuousClustering {
            m_th: None,
            recluster_every: 1,
        },
    ] {
        group.bench_function(spec.name(), |b| {
            b.iter(|| run_experiment(&params, &arrivals, &spec, 1, TraceOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_kmeans, bench_kt_select, bench_eq1, bench_runs);
criterion_main!(benches);
