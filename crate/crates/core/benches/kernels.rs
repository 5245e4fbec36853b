use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dicke_core::engine::{evolve, initial_state, EvolutionConfig, SpinDirection};
use dicke_core::model::{DimensionCap, HamiltonianOperator, Model, ModelParams, SiteCoupling, SubensembleModel, SubensembleSpec};
use dicke_core::{khz_to_angular, par, C64};
use std::hint::black_box;

fn params(n: usize, n_max: usize) -> ModelParams {
    let sites = (0..n)
        .map(|i| SiteCoupling {
            omega: khz_to_angular(4.0 + (i as f64 * 0.7).sin()),
            b: 1.0 / (n as f64).sqrt(),
            phi: 0.1 * i as f64,
        })
        .collect();
    ModelParams { eta: 0.05, delta: khz_to_angular(0.5), b_field: khz_to_angular(0.3), sites, n_max }
}

fn operators() -> Vec<(&'static str, HamiltonianOperator)> {
    let full = Model::Full(params(10, 20)).hamiltonian(DimensionCap::default()).unwrap();
    let p = params(60, 120);
    let half: Vec<usize> = (0..30).collect();
    let rest: Vec<usize> = (30..60).collect();
    let sub = Model::Subensemble(SubensembleModel {
        spec: SubensembleSpec::from_partition(&p, vec![half, rest]),
        delta: p.delta,
        b_field: p.b_field,
        n_max: p.n_max,
    })
    .hamiltonian(DimensionCap::default())
    .unwrap();
    vec![("full_n10", full), ("sub_n60_m2", sub)]
}

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for (name, h) in operators() {
        let x: Vec<C64> = (0..h.dim()).map(|i| C64::new((i as f64).cos(), 0.5)).collect();
        let mut y = vec![C64::new(0.0, 0.0); h.dim()];
        group.bench_with_input(BenchmarkId::new("parallel", name), &h, |b, h| {
            b.iter(|| h.matrix.apply(black_box(&x), &mut y))
        });
        group.bench_with_input(BenchmarkId::new("serial", name), &h, |b, h| {
            b.iter(|| h.matrix.apply_serial(black_box(&x), &mut y))
        });
    }
    group.finish();
}

fn reductions(c: &mut Criterion) {
    let n = 1 << 20;
    let a: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 0.25)).collect();
    let mut group = c.benchmark_group("dot");
    group.bench_function("pool", |b| b.iter(|| par::dot(black_box(&a), &a)));
    group.bench_function("one_thread", |b| b.iter(|| par::with_threads(1, || par::dot(black_box(&a), &a))));
    group.finish();
}

fn propagation(c: &mut Criterion) {
    let h = Model::Full(params(8, 16)).hamiltonian(DimensionCap::default()).unwrap();
    let s0 = initial_state(&h.basis, SpinDirection::PlusX);
    let cfg = EvolutionConfig::default();
    let mut group = c.benchmark_group("evolve_1ms");
    group.sample_size(10);
    group.bench_function("pool", |b| b.iter(|| evolve(&s0, &h, 1e-3, &cfg).unwrap()));
    group.bench_function("one_thread", |b| {
        b.iter(|| par::with_threads(1, || evolve(&s0, &h, 1e-3, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, matvec, reductions, propagation);
criterion_main!(benches);
