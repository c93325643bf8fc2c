//! Shared inputs for the benchmarks.

use hurwitz_lab::{AlphaParam, PeriodicFunction};

pub fn sqrt2() -> AlphaParam {
    AlphaParam::sqrt(2).unwrap()
}

pub fn mixed_f() -> PeriodicFunction {
    "1,-0.5,2,0.25,-1.5".parse().unwrap()
}

/// Radii of a short, slightly uneven block.
pub fn block_radii(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 / (1000.0 + i as f64).powf(1.001)).collect()
}
