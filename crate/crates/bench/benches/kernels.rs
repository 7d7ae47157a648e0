//! Hot-loop benchmarks: the spectral-order stencils, the level-set
//! profile builder, and the lattice shortest-path sweep that dominates
//! full pipeline runs.

use criterion::{criterion_group, criterion_main, Criterion};
use warplab_core::functional::diameter_flat;
use warplab_core::singly::{build_level_profile, stampacchia_threshold};
use warplab_core::{
    DoublyWarpedMetric, Field1D, Field2D, FlatTorus3, PeriodicGrid1D, PeriodicGrid2D,
    SinglyWarpedMetric,
};

fn bench_derivative(c: &mut Criterion) {
    let g = PeriodicGrid1D::new(1024).unwrap();
    let u = Field1D::from_fn(g, |z| (0.3 * z.sin()).exp());
    c.bench_function("derivative_1d_n1024", |b| {
        b.iter(|| std::hint::black_box(&u).derivative(1).unwrap())
    });
}

fn bench_curvature_1d(c: &mut Criterion) {
    let g = PeriodicGrid1D::new(1024).unwrap();
    let a = Field1D::from_fn(g, |z| (0.05 * z.sin()).exp());
    let b_warp = Field1D::from_fn(g, |z| (0.05 * z.cos()).exp());
    let m = DoublyWarpedMetric::new(a, b_warp).unwrap();
    c.bench_function("curvature_doubly_n1024", |b| {
        b.iter(|| std::hint::black_box(&m).scalar_curvature())
    });
}

fn bench_laplacian_2d(c: &mut Criterion) {
    let g = PeriodicGrid2D::square(128).unwrap();
    let h = Field2D::from_fn(g, |x, y| 0.1 * (x.sin() + (x + 2.0 * y).cos()));
    c.bench_function("laplacian_2d_128x128", |b| {
        b.iter(|| std::hint::black_box(&h).laplacian())
    });
}

fn bench_residual_2d(c: &mut Criterion) {
    let g = PeriodicGrid2D::square(128).unwrap();
    let h = Field2D::from_fn(g, |x, y| 0.01 * (x.sin() + (x - y).cos()));
    let m = SinglyWarpedMetric::from_log(&h).unwrap();
    c.bench_function("residual_singly_128x128", |b| {
        b.iter(|| std::hint::black_box(&m).elliptic_residual(64))
    });
}

fn bench_level_profile(c: &mut Criterion) {
    let g = PeriodicGrid2D::square(64).unwrap();
    let h = Field2D::from_fn(g, |x, y| 0.2 * (x.sin() * y.cos()).abs());
    c.bench_function("level_profile_64x64_l64", |b| {
        b.iter(|| {
            let p = build_level_profile(std::hint::black_box(&h), 64).unwrap();
            stampacchia_threshold(&p)
        })
    });
}

fn bench_flat_diameter(c: &mut Criterion) {
    let t = FlatTorus3::unit();
    c.bench_function("flat_diameter_n16", |b| {
        b.iter(|| diameter_flat(std::hint::black_box(&t), 16).unwrap())
    });
}

criterion_group!(
    benches,
    bench_derivative,
    bench_curvature_1d,
    bench_laplacian_2d,
    bench_residual_2d,
    bench_level_profile,
    bench_flat_diameter
);
criterion_main!(benches);
