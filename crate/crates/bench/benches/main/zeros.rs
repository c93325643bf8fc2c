use criterion::Criterion;
use hurwitz_lab::zeros::{argument_count, Contour, Quadrature, Rectangle};
use hurwitz_lab::Complex64;

pub fn bench(c: &mut Criterion) {
    let g = |s: Complex64| Ok(Complex64::new(1.0, 0.0) - Complex64::new(2f64.powf(1.05), 0.0) * Complex64::new(2.0, 0.0).powc(-s));
    let rect = Contour::Rect(Rectangle::new(1.01, 1.1, -1.0, 20.0).unwrap());
    let q = Quadrature::default();
    c.bench_function("argument_count dirichlet polynomial", |b| b.iter(|| argument_count(&g, &rect, &q).unwrap()));
}
