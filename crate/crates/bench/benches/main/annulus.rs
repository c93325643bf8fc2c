use criterion::Criterion;
use hurwitz_lab::annulus::{self, AnnulusSpec};
use hurwitz_lab::Complex64;
use hurwitz_lab_bench::block_radii;

pub fn bench(c: &mut Criterion) {
    let radii = block_radii(12);
    let spec = AnnulusSpec::new(&radii).unwrap();
    let z = Complex64::from_polar(0.6 * spec.outer(), 1.0);
    c.bench_function("realize 12", |b| b.iter(|| annulus::realize(&spec, z, 1e-15).unwrap()));
    c.bench_function("sample_oracle 12 x 10^4", |b| b.iter(|| annulus::sample_oracle(&radii, 10_000, 7)));
}
