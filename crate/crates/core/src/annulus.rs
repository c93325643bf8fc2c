//! Sums of unimodular multiples of fixed radii.
//!
//! For radii 0 < r₁ ≤ … ≤ r_n the set {Σ c_i r_i : |c_i| = 1} is the closed
//! annulus T_n ≤ |z| ≤ R_n with R_n = Σ r_i and
//! T_n = max(0, r_n − R_{n−1}).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnulusError {
    #[error("empty radius list")]
    EmptyList,
    #[error("radius {0} is not a positive finite number")]
    BadRadius(f64),
    #[error("|z| = {modulus} lies outside [{inner}, {outer}]")]
    NotInAnnulus { modulus: f64, inner: f64, outer: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    /// Sorted ascending.
    radii: Vec<f64>,
    /// prefix[i] = r_1 + … + r_i, prefix[0] = 0.
    prefix: Vec<f64>,
    inner: f64,
}

impl AnnulusSpec {
    pub fn new(radii: &[f64]) -> Result<Self, AnnulusError> {
        if radii.is_empty() {
            return Err(AnnulusError::EmptyList);
        }
        if let Some(&r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(AnnulusError::BadRadius(r));
        }
        let mut radii = radii.to_vec();
        radii.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(radii.len() + 1);
        prefix.push(0.0);
        for r in &radii {
            prefix.push(prefix.last().unwrap() + r);
        }
        let n = radii.len();
        let largest = radii[n - 1];
        let rest = prefix[n - 1];
        let inner = if rest <= largest { largest - rest } else { 0.0 };
        Ok(AnnulusSpec { radii, prefix, inner })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn outer(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    /// Whether T ≤ |z| ≤ R.
    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        self.inner <= m && m <= self.outer()
    }

    /// Inner radius of the annulus spanned by the first `k` radii.
    fn inner_of_prefix(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        (self.radii[k - 1] - self.prefix[k - 1]).max(0.0)
    }
}

/// (R_n, T_n) for the given radii.
pub fn radii(r: &[f64]) -> Result<(f64, f64), AnnulusError> {
    let spec = AnnulusSpec::new(r)?;
    Ok((spec.outer(), spec.inner()))
}

pub fn contains(spec: &AnnulusSpec, z: Complex64) -> bool {
    spec.contains(z)
}

/// Unimodular coefficients realizing a target, stored as angles in [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    /// Radii in ascending order, matching `angles`.
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
}

impl Realization {
    pub fn coefficients(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.angles.iter().map(|&a| Complex64::from_polar(1.0, a))
    }

    pub fn sum(&self) -> Complex64 {
        self.radii
            .iter()
            .zip(self.coefficients())
            .map(|(r, c)| c * r)
            .sum()
    }
}

fn normalize_angle(a: f64) -> f64 {
    let a = a.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Chooses c_i with |Σ c_i r_i − z| ≤ tol.
///
/// Works largest radius first: c_n is picked so that the residual
/// z − c_n r_n lands in the annulus of r₁..r_{n−1}, aiming for the middle of
/// the feasible modulus range. Among the two admissible angles the one with
/// the smaller nonnegative offset from arg z is taken.
pub fn realize(spec: &AnnulusSpec, z: Complex64, tol: f64) -> Result<Realization, AnnulusError> {
    let modulus = z.norm();
    let slack = tol.max(0.0);
    if modulus < spec.inner() - slack || modulus > spec.outer() + slack {
        return Err(AnnulusError::NotInAnnulus {
            modulus,
            inner: spec.inner(),
            outer: spec.outer(),
        });
    }

    let n = spec.radii.len();
    let mut angles = vec![0.0; n];
    let mut target = z;
    for k in (0..n).rev() {
        let r = spec.radii[k];
        let rho = target.norm();
        let phase = if rho > 0.0 { target.arg() } else { 0.0 };
        if k == 0 {
            angles[0] = normalize_angle(phase);
            break;
        }
        // |target − c r| ranges over [|ρ − r|, ρ + r]; intersect with the
        // annulus of the remaining radii.
        let lo = (rho - r).abs().max(spec.inner_of_prefix(k));
        let hi = (rho + r).min(spec.prefix[k]);
        let want = if lo <= hi { 0.5 * (lo + hi) } else { hi.max(0.0) };
        let offset = if rho == 0.0 {
            0.0
        } else {
            let cos = ((rho * rho + r * r - want * want) / (2.0 * rho * r)).clamp(-1.0, 1.0);
            cos.acos()
        };
        let angle = normalize_angle(phase + offset);
        angles[k] = angle;
        target -= Complex64::from_polar(r, angle);
    }

    let out = Realization {
        radii: spec.radii.clone(),
        angles,
    };
    let err = (out.sum() - z).norm();
    if err > tol.max(1e-300) && modulus >= spec.inner() && modulus <= spec.outer() && err > 1e-9 * spec.outer() {
        // numerically the target was on a boundary; report as outside
        return Err(AnnulusError::NotInAnnulus {
            modulus,
            inner: spec.inner(),
            outer: spec.outer(),
        });
    }
    Ok(out)
}

/// (min |Σ|, max |Σ|) over `k` uniformly random phase vectors.
pub fn sample_oracle(r: &[f64], k: usize, seed: u64) -> (f64, f64) {
    const CHUNK: usize = 4096;
    let chunks = k.div_ceil(CHUNK).max(1);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let count = CHUNK.min(k - c * CHUNK);
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for _ in 0..count {
                let s: Complex64 = r
                    .iter()
                    .map(|&ri| Complex64::from_polar(ri, rng.random_range(0.0..TAU)))
                    .sum();
                let m = s.norm();
                lo = lo.min(m);
                hi = hi.max(m);
            }
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn inner_radius_formula(r in prop::collection::vec(0.01..10.0f64, 1..12)) {
            let (outer, inner) = radii(&r).unwrap();
            let sum: f64 = r.iter().sum();
            let max = r.iter().cloned().fold(0.0, f64::max);
            prop_assert!((outer - sum).abs() <= 1e-12 * sum);
            prop_assert!((inner - (2.0 * max - sum).max(0.0)).abs() <= 1e-12 * sum);
        }

        #[test]
        fn realize_hits_reachable_targets(
            r in prop::collection::vec(0.01..10.0f64, 1..10),
            u in 0.0..1.0f64,
            phase in 0.0..std::f64::consts::TAU,
        ) {
            let spec = AnnulusSpec::new(&r).unwrap();
            let m = spec.inner() + u * (spec.outer() - spec.inner());
            let z = Complex64::from_polar(m, phase);
            let got = realize(&spec, z, 1e-12).unwrap();
            prop_assert!((got.sum() - z).norm() <= 1e-9 * (1.0 + spec.outer()));
        }
    }
}
