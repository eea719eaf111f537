use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qrank_core::bench::{bernoulli_mask, synth_low_qrank};
use qrank_core::orth::{dct_matrix, pca_q};
use qrank_core::qnorm::{prox_q_nuclear, q_singular_values};
use qrank_core::solver::admm_complete;
use qrank_core::SolverConfig;

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");
    for n in [10usize, 30] {
        let (t, _) = synth_low_qrank(n, n, n, n / 2, 1).unwrap();
        let q = dct_matrix(n).unwrap();
        group.bench_with_input(BenchmarkId::new("pca_q", n), &t, |b, t| {
            b.iter(|| pca_q(black_box(t), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("q_singular_values", n), &t, |b, t| {
            b.iter(|| q_singular_values(black_box(t), &q).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("prox_q_nuclear", n), &t, |b, t| {
            b.iter(|| prox_q_nuclear(black_box(t), &q, 0.05).unwrap())
        });
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("admm");
    group.sample_size(10);
    let (truth, _) = synth_low_qrank(10, 10, 10, 2, 3).unwrap();
    let mask = bernoulli_mask(truth.dims(), 0.6, 4).unwrap();
    let y = truth.project_omega(&mask).unwrap();
    let cfg = SolverConfig::default();
    group.bench_function("adaptive_10", |b| {
        b.iter(|| admm_complete(black_box(&y), &mask, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, kernels, solve);
criterion_main!(benches);
