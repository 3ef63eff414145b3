use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mediatopo::linalg::{c64, re, sigma_z};
use mediatopo::{
    chern_2d, effective_bloch, models, winding_chiral_1d, winding_spectral_1d, BandSelection, EmitterLayout, Flavor,
    KGrid, SymmetryOp, Variant,
};

fn windings(c: &mut Criterion) {
    let ssh = models::ssh(1.0, 1.5);
    let hn = models::hatano_nelson(1.0, 0.5, 1.0);
    let s = SymmetryOp::new(sigma_z(), Flavor::Chiral, Variant::Herm).unwrap();
    let mut group = c.benchmark_group("winding");
    for m in [128, 512, 2048] {
        let grid = KGrid::new(m, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("chiral_ssh", m), &grid, |b, g| {
            b.iter(|| winding_chiral_1d(black_box(&ssh), &s, g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("spectral_hn", m), &grid, |b, g| {
            b.iter(|| winding_spectral_1d(black_box(&hn), c64(0.0, -1.0), g).unwrap())
        });
    }
    group.finish();
}

fn chern(c: &mut Criterion) {
    let qwz = models::qwz(1.2, 1.0);
    let mut group = c.benchmark_group("chern_qwz");
    group.sample_size(20);
    for m in [32, 64, 128] {
        let grid = KGrid::new(m, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &grid, |b, g| {
            b.iter(|| chern_2d(black_box(&qwz), &BandSelection::Below(0.0), g).unwrap())
        });
    }
    group.finish();
}

fn mediation(c: &mut Criterion) {
    let qwz = models::qwz(1.2, 1.0);
    let layout = EmitterLayout::uniform(2, re(0.0), 0.1).unwrap();
    let grid = KGrid::new(64, 2).unwrap();
    let mut group = c.benchmark_group("mediated_chern_qwz");
    group.sample_size(20);
    group.bench_function("effective_bloch", |b| b.iter(|| effective_bloch(black_box(&qwz), &layout).unwrap()));
    let h_a = effective_bloch(&qwz, &layout).unwrap().model;
    group.bench_function("chern_64", |b| {
        b.iter(|| chern_2d(black_box(&h_a), &BandSelection::Below(0.0), &grid).unwrap())
    });
    group.finish();
}

criterion_group!(benches, windings, chern, mediation);
criterion_main!(benches);
