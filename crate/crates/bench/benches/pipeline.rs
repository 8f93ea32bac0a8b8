use criterion::{criterion_group, criterion_main, Criterion};
use monodromy_bench::{fermat_quartic, generic_quartic, point};
use monodromy_core::classify::classify_point;
use monodromy_core::monodromy::monodromy_generators;
use monodromy_core::pencil::{branch_points, build_pencil, make_center};
use monodromy_core::poly::{all_roots, RootOpts, UniPoly};
use monodromy_core::Config;
use num_complex::Complex64;
use std::hint::black_box;

fn bench_roots(c: &mut Criterion) {
    let coeffs: Vec<Complex64> = (0..=12)
        .map(|k| Complex64::new(((k * 37 + 11) % 17) as f64 - 8.0, ((k * 23 + 5) % 13) as f64 - 6.0))
        .collect();
    let p = UniPoly::from_coeffs(coeffs);
    let opts = RootOpts::default();
    c.bench_function("aberth degree 12", |b| {
        b.iter(|| all_roots(black_box(&p), &opts).unwrap())
    });
}

fn bench_branch_locus(c: &mut Criterion) {
    let cfg = Config::default();
    let f = generic_quartic();
    let center = make_center(&f, &point(&[3, 1, 5]), &cfg).unwrap();
    let chart = build_pencil(&f, &center, 0, &cfg).unwrap();
    c.bench_function("branch locus of a generic quartic", |b| {
        b.iter(|| branch_points(black_box(&chart), &cfg).unwrap())
    });
}

fn bench_monodromy(c: &mut Criterion) {
    let cfg = Config::default();
    let f = generic_quartic();
    let center = make_center(&f, &point(&[3, 1, 5]), &cfg).unwrap();
    let chart = build_pencil(&f, &center, 0, &cfg).unwrap();
    c.bench_function("monodromy generators (12 loops, degree 4)", |b| {
        b.iter(|| monodromy_generators(black_box(&chart), 7, &cfg).unwrap())
    });
}

fn bench_classify(c: &mut Criterion) {
    let cfg = Config::default();
    let f = fermat_quartic();
    c.bench_function("classify Fermat quartic Galois point", |b| {
        b.iter(|| classify_point(black_box(&f), &point(&[1, 0, 0]), &cfg).unwrap())
    });
}

criterion_group!(benches, bench_roots, bench_branch_locus, bench_monodromy, bench_classify);
criterion_main!(benches);
