use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use hurwitz_lab::eval::{self, ComplexPoint};
use hurwitz_lab::{Complex64, HpContext};
use hurwitz_lab_bench::{mixed_f, sqrt2};

pub fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("hurwitz");
    for t in [0.0, 10.0, 100.0, 1000.0] {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| eval::hurwitz(black_box(Complex64::new(1.5, t)), 0.75, 1e-12).unwrap())
        });
    }
    group.finish();

    let f = mixed_f();
    let alpha = sqrt2();
    c.bench_function("lfunction q=5", |b| {
        b.iter(|| eval::lfunction(black_box(ComplexPoint::new(1.3, 25.0)), &f, &alpha, 1e-12).unwrap())
    });
    c.bench_function("decompose q=5", |b| {
        b.iter(|| eval::decompose_tol(black_box(ComplexPoint::new(1.3, 25.0)), &f, &alpha, 1e-12).unwrap())
    });

    c.bench_function("hurwitz 40 digits", |b| {
        b.iter(|| {
            let mut ctx = HpContext::with_digits(40);
            let s = ctx.from_f64(1.01);
            let a = ctx.from_f64(0.75);
            ctx.hurwitz_real(&s, &a)
        })
    });
}
