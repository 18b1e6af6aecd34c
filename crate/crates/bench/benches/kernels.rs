use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tentspace::functionals::{self, AVariant};
use tentspace::{sample, Space};
use tentspace_bench::{cloud, lattice_fixture};

fn ball_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_distinct_balls");
    for n in [64, 256, 1024] {
        let coords: Vec<Vec<f64>> = cloud(n).coordinates().unwrap().to_vec();
        let weights = cloud(n).weights().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let ids = (0..n).map(|k| format!("p{k}")).collect();
                let space = Space::from_coordinates(ids, coords.clone(), weights.clone()).unwrap();
                black_box(space.enumerate_distinct_balls().len())
            })
        });
    }
    group.finish();
}

fn lusin(c: &mut Criterion) {
    let mut group = c.benchmark_group("lusin_a");
    for side in [8, 16, 24] {
        let (space, grid, f) = lattice_fixture(side);
        group.bench_with_input(BenchmarkId::from_parameter(side * side), &side, |b, _| {
            b.iter(|| functionals::lusin_a(&space, &grid, black_box(&f), 2.0, 1.0, AVariant::default(), None).unwrap())
        });
    }
    group.finish();
}

fn carleson(c: &mut Criterion) {
    let mut group = c.benchmark_group("carleson_c");
    for side in [8, 16, 24] {
        let (space, grid, f) = lattice_fixture(side);
        group.bench_with_input(BenchmarkId::from_parameter(side * side), &side, |b, _| {
            b.iter(|| functionals::carleson_c(&space, &grid, black_box(&f), 2.0, 1.0).unwrap())
        });
    }
    group.finish();
}

fn maximal(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximal");
    for n in [256, 1024] {
        let space = cloud(n);
        let mut rng = sample::rng(2);
        let phi = sample::uniform_values(&mut rng, n, -1.0, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| functionals::maximal(&space, black_box(&phi)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ball_enumeration, lusin, carleson, maximal);
criterion_main!(benches);
