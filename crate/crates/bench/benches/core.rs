use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ismi_core::gp::ismi_gp;
use ismi_core::logreg::{generate_dataset, train_logreg, DataModel, TrainConfig};
use ismi_core::sgld::{ismi_bound_monte_carlo, SamplingScheme};
use ismi_core::{chi_squared_neg_cgf, knn_mi, substream, SampleCloud};
use rand_distr::{Distribution, StandardNormal};

fn correlated_cloud(n: usize, rho: f64) -> SampleCloud {
    let mut rng = substream(1, 0);
    let mut rows = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        rows.push(a);
        rows.push(rho * a + (1.0 - rho * rho).sqrt() * b);
    }
    SampleCloud::new(1, 1, rows, 5).unwrap()
}

fn knn(c: &mut Criterion) {
    let mut group = c.benchmark_group("knn_mi");
    group.sample_size(10);
    for n in [1000, 5000] {
        let cloud = correlated_cloud(n, 0.5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cloud, |b, cloud| b.iter(|| knn_mi(black_box(cloud)).unwrap()));
    }
    group.finish();
}

fn dual_inverse(c: &mut Criterion) {
    let bound = chi_squared_neg_cgf(3, 1.0).unwrap().numeric_only();
    c.bench_function("inverse_dual/numeric", |b| b.iter(|| bound.inverse_dual(black_box(0.37)).unwrap()));
}

fn phase_retrieval(c: &mut Criterion) {
    let mut group = c.benchmark_group("ismi_gp");
    for n in [2, 64, 1024] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| ismi_gp(black_box(n), 1.0).unwrap()));
    }
    group.finish();
}

fn sgld_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("sgld_monte_carlo");
    group.sample_size(10);
    group.bench_function("n1000_K10_100paths", |b| {
        b.iter(|| ismi_bound_monte_carlo(1000, 10, 1.0, 1.0, 1.0, SamplingScheme::WithoutReplacement, 100, 3).unwrap())
    });
    group.finish();
}

fn logistic(c: &mut Criterion) {
    let model = DataModel::standard();
    let data = generate_dataset(&model, 100, &mut substream(2, 0)).unwrap();
    let config = TrainConfig::default();
    c.bench_function("train_logreg/n100", |b| b.iter(|| train_logreg(black_box(&data), &config).unwrap()));
}

criterion_group!(benches, knn, dual_inverse, phase_retrieval, sgld_paths, logistic);
criterion_main!(benches);
