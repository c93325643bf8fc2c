use criterion::Criterion;
use hurwitz_lab::ideals::{factor_shift, FactorTable};
use hurwitz_lab_bench::sqrt2;

pub fn bench(c: &mut Criterion) {
    let alpha = sqrt2();
    c.bench_function("factor_shift 10^6", |b| b.iter(|| factor_shift(1_000_003, &alpha).unwrap()));
    c.bench_function("private shifts up to 2000", |b| {
        b.iter(|| {
            let mut table = FactorTable::new(&alpha).unwrap();
            table.block(1980, 20).unwrap()
        })
    });
}
