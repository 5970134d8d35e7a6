use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kbb_core::classnum::{class_number, class_number_by_reduction};
use kbb_core::fp::{brute_force_orthogonal_order, FpQuadraticSpace};
use kbb_core::lattice::make_l2d;
use kbb_core::linalg::{smith_normal_form, IntMatrix};

fn snf(c: &mut Criterion) {
    let mut group = c.benchmark_group("smith_normal_form");
    for n in [4usize, 6, 8] {
        // Deterministic dense matrix with mixed signs.
        let rows: Vec<Vec<i64>> =
            (0..n).map(|i| (0..n).map(|j| ((i * 7 + j * 13 + i * j) % 23) as i64 - 11).collect()).collect();
        let m = IntMatrix::from_i64_rows(&rows);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| smith_normal_form(black_box(m))));
    }
    group.finish();
}

fn isotropic(c: &mut Criterion) {
    let mut group = c.benchmark_group("isotropic_elements");
    for p in [5i64, 7, 11, 13] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| {
                // Fresh lattice each time so the discriminant is rebuilt.
                let l = make_l2d(p * p).unwrap();
                l.discriminant_module().unwrap().isotropic_elements().len()
            })
        });
    }
    group.finish();
}

fn classnum(c: &mut Criterion) {
    let mut group = c.benchmark_group("class_number");
    for d in [-300i64, -1200, -5808] {
        group.bench_with_input(BenchmarkId::new("reduced_scan", d), &d, |b, &d| b.iter(|| class_number(black_box(d))));
        group.bench_with_input(BenchmarkId::new("by_reduction", d), &d, |b, &d| {
            b.iter(|| class_number_by_reduction(black_box(d)))
        });
    }
    group.finish();
}

fn orders(c: &mut Criterion) {
    let space = FpQuadraticSpace::standard(3, None, 5).unwrap();
    c.bench_function("brute_force_order_dim3_p5", |b| b.iter(|| brute_force_orthogonal_order(black_box(&space))));
}

criterion_group!(benches, snf, isotropic, classnum, orders);
criterion_main!(benches);
