//! Criterion benchmarks for the hot kernels: Smith normal form, coset
//! enumeration, Gauss sums, and a classical operator application.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hecke_core::corpus::delta;
use hecke_core::cosets::v_cosets;
use hecke_core::exact::{snf_rect, Int, IntMat};
use hecke_core::fourier::enumerate_indices;
use hecke_core::hecke::{apply_t, gauss_ab_batch};

fn fixture_matrix(n: usize) -> IntMat {
    // deterministic mixed-magnitude entries
    let rows: Vec<Vec<Int>> = (0..n)
        .map(|i| (0..n).map(|j| Int::from(((i * 7 + j * 13) % 19) as i64 - 9)).collect())
        .collect();
    IntMat::from_rows(rows)
}

fn bench_snf(c: &mut Criterion) {
    let m = fixture_matrix(6);
    c.bench_function("snf 6x6", |b| b.iter(|| snf_rect(black_box(&m))));
}

fn bench_cosets(c: &mut Criterion) {
    c.bench_function("v_cosets n=2 p=3", |b| {
        b.iter(|| v_cosets(black_box(2), 3, 1, 1, 0).unwrap())
    });
}

fn bench_gauss(c: &mut Criterion) {
    let ts = enumerate_indices(2, 3).unwrap();
    c.bench_function("gauss_ab_batch n=2 p=3", |b| {
        b.iter(|| gauss_ab_batch(2, 1, 1, 3, black_box(&ts)).unwrap())
    });
}

fn bench_apply(c: &mut Criterion) {
    let f = delta(40).unwrap();
    c.bench_function("apply_t Delta p=2", |b| {
        b.iter(|| apply_t(black_box(&f), 2, 1, 20).unwrap())
    });
}

criterion_group!(kernels, bench_snf, bench_cosets, bench_gauss, bench_apply);
criterion_main!(kernels);
