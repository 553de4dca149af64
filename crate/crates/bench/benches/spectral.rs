use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use raftmin_bench::{smooth_field, square_grid};
use raftmin_core::energy::f_star;
use raftmin_core::gamma::optimize_profile;
use raftmin_core::minimize::semi_implicit_step;
use raftmin_core::operators::helmholtz_inverse;
use raftmin_core::{CellProfile, EnergyParams, Potential};

const SIZES: [(usize, usize); 3] = [(1, 4096), (2, 128), (2, 256)];

fn label(d: usize, n: usize) -> String {
    if d == 1 {
        format!("{n}")
    } else {
        format!("{n}x{n}")
    }
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for (d, n) in SIZES {
        let g = square_grid(d, n);
        let u = smooth_field(&g, 1);
        let s = u.transform();
        group
            .bench_with_input(BenchmarkId::new("forward", label(d, n)), &u, |b, u| b.iter(|| black_box(u.transform())));
        group.bench_with_input(BenchmarkId::new("inverse", label(d, n)), &s, |b, s| b.iter(|| black_box(s.inverse())));
    }
    group.finish();
}

fn resolvent(c: &mut Criterion) {
    let mut group = c.benchmark_group("helmholtz_inverse");
    for (d, n) in SIZES {
        let g = square_grid(d, n);
        let u = smooth_field(&g, 2);
        group.bench_with_input(BenchmarkId::from_parameter(label(d, n)), &u, |b, u| {
            b.iter(|| black_box(helmholtz_inverse(u, 0.05).unwrap()))
        });
    }
    group.finish();
}

fn energy(c: &mut Criterion) {
    let pot = Potential::standard();
    let p = EnergyParams::new(0.05, 0.75).unwrap();
    let mut group = c.benchmark_group("f_star");
    for (d, n) in SIZES {
        let g = square_grid(d, n);
        let u = smooth_field(&g, 3);
        group.bench_with_input(BenchmarkId::from_parameter(label(d, n)), &u, |b, u| {
            b.iter(|| black_box(f_star(u, &p, &pot).unwrap().total))
        });
    }
    group.finish();
}

fn flow_step(c: &mut Criterion) {
    let pot = Potential::standard();
    let p = EnergyParams::new(0.05, 0.75).unwrap();
    let mut group = c.benchmark_group("semi_implicit_step");
    for (d, n) in SIZES {
        let g = square_grid(d, n);
        let u = smooth_field(&g, 4);
        group.bench_with_input(BenchmarkId::from_parameter(label(d, n)), &u, |b, u| {
            b.iter(|| black_box(semi_implicit_step(u, 0.05, &p, &pot, 4.0, false)))
        });
    }
    group.finish();
}

fn cell(c: &mut Criterion) {
    let pot = Potential::standard();
    let mut group = c.benchmark_group("cell_optimize");
    group.sample_size(10);
    for knots in [128, 512] {
        let start = CellProfile::tanh(knots, 0.05, 0.1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(knots), &start, |b, s| {
            b.iter(|| black_box(optimize_profile(s, 0.06, 0.05, &pot, 200).unwrap().energy))
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, resolvent, energy, flow_step, cell);
criterion_main!(benches);
