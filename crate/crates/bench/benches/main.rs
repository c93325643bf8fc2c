#[path = "main/annulus.rs"]
mod annulus;
#[path = "main/eval.rs"]
mod eval;
#[path = "main/ideals.rs"]
mod ideals;
#[path = "main/kronecker.rs"]
mod kronecker;
#[path = "main/zeros.rs"]
mod zeros;

use criterion::{criterion_group, criterion_main};

criterion_group!(
    benches,
    eval::bench,
    kronecker::bench,
    annulus::bench,
    ideals::bench,
    zeros::bench
);
criterion_main!(benches);
