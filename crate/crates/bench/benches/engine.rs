use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use einstein_forge::catalog::{catalog_verify, VerifyOverrides};
use einstein_forge::classify::{classify_warp, drop_polynomial};
use einstein_forge::curvature::{curvature_at, einstein_residual_opts};
use einstein_forge::odes::{solve_iterated_warp, IteratedWarpProblem};
use einstein_forge::MetricSpec;
use einstein_forge_bench::fixture;

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature_at");
    for name in ["mercator-n4", "calabi-ricci-flat", "fubini-study"] {
        let (spec, grid) = fixture(name, 1);
        group.bench_function(name, |b| b.iter(|| curvature_at(&spec, black_box(&grid[0])).unwrap()));
    }
    group.finish();
}

fn grid_sweep(c: &mut Criterion) {
    let (spec, grid) = fixture("main-cos-sinh", 64);
    let mut group = c.benchmark_group("einstein_residual_64");
    group.bench_function("serial", |b| {
        b.iter(|| einstein_residual_opts(&spec, &grid, 1e-7, false).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| einstein_residual_opts(&spec, &grid, 1e-7, true).unwrap())
    });
    group.finish();
}

fn parsing(c: &mut Criterion) {
    let text = "conformal(1/(cos(t)+sinh(s)), product(diag(t,x;+1,+1;1,sin(t)^2), diag(s,y;+1,+1;1,cosh(s)^2)))";
    c.bench_function("parse_metric", |b| {
        b.iter(|| MetricSpec::parse(black_box(text)).unwrap())
    });
}

fn odes(c: &mut Criterion) {
    let p = IteratedWarpProblem::new(4, 1.0, 0.5, 0.0, 3f64.sqrt(), 0.0).unwrap();
    c.bench_function("warp_span10_h1e-3", |b| {
        b.iter(|| solve_iterated_warp(&p, [0.0, 10.0], 1e-3).unwrap())
    });
    c.bench_function("classify_warp", |b| {
        b.iter(|| classify_warp(4, black_box(0.25), 1.0, -0.75).unwrap())
    });
    c.bench_function("drop_polynomial_60", |b| {
        b.iter(|| drop_polynomial(black_box(60)).unwrap())
    });
}

fn catalog(c: &mut Criterion) {
    c.bench_function("catalog_verify_flatexample", |b| {
        b.iter(|| catalog_verify("flatexample", &VerifyOverrides::default()).unwrap())
    });
}

criterion_group!(benches, curvature, grid_sweep, parsing, odes, catalog);
criterion_main!(benches);
