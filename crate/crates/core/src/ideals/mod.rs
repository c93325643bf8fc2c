//! Ideal arithmetic in quadratic fields K = ℚ(√d).
//!
//! Elements of O_K are written x + yω with ω = √d, or ω = (1+√d)/2 when
//! d ≡ 1 (mod 4); ω is a root of X² − tX − c. A prime ideal above p is
//! labelled (p, r) with r a root of that polynomial mod p, so that
//! x + yω ∈ 𝔭 ⇔ x + y·r ≡ 0 (mod p). Inert primes carry no root.

mod basis;
mod element;
mod numth;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alpha::AlphaParam;

pub use basis::{multiplicative_basis, multiplicative_basis_of, MultiplicativeBasis};
pub use element::FieldElement;
use numth::{factor_u128, inv_mod, sqrt_mod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("alpha is not a quadratic irrational")]
    NotQuadratic,
    #[error("{0} is not a valid quadratic radicand (square-free, not 0 or 1)")]
    InvalidField(i64),
    #[error("norm exceeds the exact 128-bit range")]
    NormOverflow,
    #[error("the zero element has no factorization")]
    ZeroElement,
    #[error("element must be positive: {0}")]
    NotPositive(String),
    #[error("no fundamental unit with coefficient below {0} (field d = {1})")]
    UnitSearchExhausted(u64, i64),
    #[error("exact reconstruction failed for {0}")]
    ReconstructionFailed(String),
}

/// K = ℚ(√d) with ring of integers ℤ[ω], ω² = tω + c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticField {
    d: i64,
    t: i128,
    c: i128,
}

impl QuadraticField {
    pub fn new(d: i64) -> Result<Self, IdealError> {
        if d == 0 || d == 1 || !numth::square_free(d) {
            return Err(IdealError::InvalidField(d));
        }
        let (t, c) = if d.rem_euclid(4) == 1 {
            (1, (d as i128 - 1) / 4)
        } else {
            (0, d as i128)
        };
        Ok(QuadraticField { d, t, c })
    }

    pub fn of_alpha(alpha: &AlphaParam) -> Result<Self, IdealError> {
        let q = alpha.as_quadratic().ok_or(IdealError::NotQuadratic)?;
        Self::new(q.d)
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn discriminant(&self) -> i64 {
        if self.t == 1 {
            self.d
        } else {
            4 * self.d
        }
    }

    /// (t, c) with ω² = tω + c.
    pub fn omega_poly(&self) -> (i128, i128) {
        (self.t, self.c)
    }

    pub fn omega(&self) -> f64 {
        let s = (self.d as f64).sqrt();
        if self.t == 1 {
            (1.0 + s) / 2.0
        } else {
            s
        }
    }

    /// Norm of x + yω, i.e. x² + txy − cy².
    pub fn norm(&self, x: i128, y: i128) -> Result<i128, IdealError> {
        let o = IdealError::NormOverflow;
        let xx = x.checked_mul(x).ok_or(o.clone())?;
        let xy = x.checked_mul(y).and_then(|v| v.checked_mul(self.t)).ok_or(o.clone())?;
        let yy = y.checked_mul(y).and_then(|v| v.checked_mul(self.c)).ok_or(o.clone())?;
        xx.checked_add(xy).and_then(|v| v.checked_sub(yy)).ok_or(o)
    }

    /// (x₁ + y₁ω)(x₂ + y₂ω).
    pub fn mul(&self, a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
        let yy = a.1 * b.1;
        (a.0 * b.0 + self.c * yy, a.0 * b.1 + a.1 * b.0 + self.t * yy)
    }

    /// Roots of X² − tX − c modulo p, ascending and without repeats.
    pub fn roots_mod(&self, p: u64) -> Vec<u64> {
        let t = self.t.rem_euclid(p as i128) as u64;
        let c = self.c.rem_euclid(p as i128) as u64;
        if p == 2 {
            return (0..2).filter(|&x| (x * x + 2 * 2 - t * x - c) % 2 == 0).collect();
        }
        let pm = p as u128;
        let disc = ((t as u128 * t as u128) + 4 * c as u128) % pm;
        let Some(s) = sqrt_mod(disc as u64, p) else {
            return Vec::new();
        };
        let half = inv_mod(2, p).expect("odd prime");
        let r1 = ((t as u128 + s as u128) * half as u128 % pm) as u64;
        let r2 = ((t as u128 + pm - s as u128) * half as u128 % pm) as u64;
        let mut v = vec![r1, r2];
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn splitting(&self, p: u64) -> Splitting {
        let roots = self.roots_mod(p);
        match roots.len() {
            0 => Splitting::Inert,
            1 => Splitting::Ramified,
            _ => Splitting::Split,
        }
    }

    /// Prime ideals above p with the exponent of each in pO_K.
    pub fn primes_above(&self, p: u64) -> Vec<(PrimeIdeal, i64)> {
        let roots = self.roots_mod(p);
        match roots.len() {
            0 => vec![(PrimeIdeal { p, root: None }, 1)],
            1 => vec![(PrimeIdeal { p, root: Some(roots[0]) }, 2)],
            _ => roots.into_iter().map(|r| (PrimeIdeal { p, root: Some(r) }, 1)).collect(),
        }
    }

    /// Whether x + yω lies in 𝔭.
    pub fn in_prime(&self, prime: &PrimeIdeal, x: i128, y: i128) -> bool {
        let p = prime.p as i128;
        match prime.root {
            None => x.rem_euclid(p) == 0 && y.rem_euclid(p) == 0,
            Some(r) => (x.rem_euclid(p) as u128 + y.rem_euclid(p) as u128 * r as u128) % p as u128 == 0,
        }
    }

    /// Valuations of an integral element x + yω ≠ 0.
    fn factor_integral(&self, x: i128, y: i128) -> Result<BTreeMap<PrimeIdeal, i64>, IdealError> {
        if x == 0 && y == 0 {
            return Err(IdealError::ZeroElement);
        }
        let mut out = BTreeMap::new();
        let g = x.unsigned_abs().gcd(&y.unsigned_abs());
        for (p, e) in factor_u128(g) {
            for (prime, mult) in self.primes_above(p as u64) {
                *out.entry(prime).or_insert(0) += mult * e as i64;
            }
        }
        let (x1, y1) = (x / g as i128, y / g as i128);
        let n = self.norm(x1, y1)?;
        for (p, e) in factor_u128(n.unsigned_abs()) {
            let pm = p as i128;
            // primitive elements are never divisible by p itself, so y1 is a unit mod p
            let yinv = inv_mod(y1.rem_euclid(pm) as u64, p as u64).ok_or(IdealError::NormOverflow)?;
            let r = ((pm - x1.rem_euclid(pm)) as u128 * yinv as u128 % p) as u64;
            debug_assert!(self.roots_mod(p as u64).contains(&r));
            *out.entry(PrimeIdeal { p: p as u64, root: Some(r) }).or_insert(0) += e as i64;
        }
        Ok(out)
    }

    /// Valuations of a nonzero element of K at every prime where they are nonzero.
    pub fn valuations(&self, z: &FieldElement) -> Result<BTreeMap<PrimeIdeal, i64>, IdealError> {
        let (x, y, den) = z.integral_coords(self)?;
        let mut out = self.factor_integral(x, y)?;
        for (p, e) in factor_u128(den) {
            for (prime, mult) in self.primes_above(p as u64) {
                *out.entry(prime).or_insert(0) -= mult * e as i64;
            }
        }
        out.retain(|_, v| *v != 0);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// A prime ideal (p, ω − r), or the inert prime pO_K when `root` is None.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub p: u64,
    pub root: Option<u64>,
}

impl PrimeIdeal {
    pub fn norm(&self) -> u128 {
        match self.root {
            Some(_) => self.p as u128,
            None => self.p as u128 * self.p as u128,
        }
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.root {
            Some(r) => write!(f, "({}, w-{})", self.p, r),
            None => write!(f, "({})", self.p),
        }
    }
}

/// An integral ideal given by its prime factorization, with its ℤ-basis
/// {a, b + cω} in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ideal {
    pub factors: Vec<(PrimeIdeal, u32)>,
    /// (a, b, c): the ideal is aℤ + (b + cω)ℤ.
    pub basis: (i128, i128, i128),
}

impl Ideal {
    pub fn unit() -> Self {
        Ideal {
            factors: Vec::new(),
            basis: (1, 0, 1),
        }
    }

    pub fn from_factors(field: &QuadraticField, factors: Vec<(PrimeIdeal, u32)>) -> Self {
        let mut basis = (1, 0, 1);
        for (prime, e) in &factors {
            let pb = prime_basis(prime);
            for _ in 0..*e {
                basis = module_product(field, basis, pb);
            }
        }
        Ideal { factors, basis }
    }

    pub fn norm(&self) -> u128 {
        (self.basis.0 * self.basis.2) as u128
    }

    pub fn contains(&self, x: i128, y: i128) -> bool {
        let (a, b, c) = self.basis;
        y.rem_euclid(c) == 0 && (x - (y / c) * b).rem_euclid(a) == 0
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }
}

fn prime_basis(prime: &PrimeIdeal) -> (i128, i128, i128) {
    let p = prime.p as i128;
    match prime.root {
        Some(r) => (p, (-(r as i128)).rem_euclid(p), 1),
        None => (p, 0, p),
    }
}

/// HNF basis of the ℤ-module spanned by the given vectors (x, y) ↔ x + yω.
fn z2_hnf(vs: &[(i128, i128)]) -> (i128, i128, i128) {
    let mut pivot: Option<(i128, i128)> = None;
    let mut xs: Vec<i128> = Vec::new();
    for &v in vs {
        if v.1 == 0 {
            xs.push(v.0);
            continue;
        }
        match pivot {
            None => pivot = Some(v),
            Some(p) => {
                let e = p.1.extended_gcd(&v.1);
                let g = e.gcd;
                let np = (e.x * p.0 + e.y * v.0, g);
                let zero_x = (v.1 / g) * p.0 - (p.1 / g) * v.0;
                xs.push(zero_x);
                pivot = Some(np);
            }
        }
    }
    let a = xs.iter().fold(0i128, |acc, x| acc.gcd(x));
    let (mut b, mut c) = pivot.unwrap_or((0, 0));
    if c < 0 {
        b = -b;
        c = -c;
    }
    if a != 0 {
        b = b.rem_euclid(a);
    }
    (a, b, c)
}

fn module_product(field: &QuadraticField, i: (i128, i128, i128), j: (i128, i128, i128)) -> (i128, i128, i128) {
    let gi = [(i.0, 0), (i.1, i.2)];
    let gj = [(j.0, 0), (j.1, j.2)];
    let mut gens = Vec::with_capacity(4);
    for a in gi {
        for b in gj {
            gens.push(field.mul(a, b));
        }
    }
    z2_hnf(&gens)
}

/// The ideal denominator 𝔞 = Π 𝔭^{max(0, −v_𝔭(α))}: the smallest integral
/// ideal with 𝔞α ⊆ O_K.
pub fn ideal_denominator(alpha: &AlphaParam) -> Result<Ideal, IdealError> {
    let field = QuadraticField::of_alpha(alpha)?;
    let a = FieldElement::from_alpha(alpha)?;
    Ok(denominator_of(&field, &a)?)
}

fn denominator_of(field: &QuadraticField, a: &FieldElement) -> Result<Ideal, IdealError> {
    let v = field.valuations(a)?;
    let factors = v
        .into_iter()
        .filter(|(_, e)| *e < 0)
        .map(|(p, e)| (p, (-e) as u32))
        .collect();
    Ok(Ideal::from_factors(field, factors))
}

/// Prime factorization of the integral ideal (n+α)𝔞.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealFactorization {
    pub n: i64,
    pub factors: Vec<(PrimeIdeal, u32)>,
    /// |Norm((n+α)𝔞)|, computed from the element norm, not from the factors.
    pub norm: u128,
}

impl IdealFactorization {
    /// Π N(𝔭)^ν compared exactly against the recorded norm.
    pub fn norm_recombines(&self) -> bool {
        let mut prod = BigInt::from(1u8);
        for (p, e) in &self.factors {
            prod *= BigInt::from(p.norm()).pow(*e);
        }
        prod == BigInt::from(self.norm)
    }

    pub fn exponent(&self, prime: &PrimeIdeal) -> u32 {
        self.factors
            .iter()
            .find(|(p, _)| p == prime)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }
}

/// Shared state for factoring the shifts n + α of one α.
#[derive(Debug, Clone)]
struct ShiftContext {
    field: QuadraticField,
    alpha: FieldElement,
    denominator: Ideal,
}

impl ShiftContext {
    fn new(alpha: &AlphaParam) -> Result<Self, IdealError> {
        let field = QuadraticField::of_alpha(alpha)?;
        let a = FieldElement::from_alpha(alpha)?;
        let denominator = denominator_of(&field, &a)?;
        Ok(ShiftContext {
            field,
            alpha: a,
            denominator,
        })
    }

    fn factor(&self, n: i64) -> Result<IdealFactorization, IdealError> {
        let z = self.alpha.add_integer(n);
        let mut v = self.field.valuations(&z)?;
        for (p, e) in &self.denominator.factors {
            *v.entry(*p).or_insert(0) += *e as i64;
        }
        let factors: Vec<(PrimeIdeal, u32)> = v
            .into_iter()
            .filter(|(_, e)| *e != 0)
            .map(|(p, e)| {
                debug_assert!(e > 0, "(n+α)𝔞 must be integral");
                (p, e as u32)
            })
            .collect();
        let norm = z.norm(self.field.d()).abs() * BigRational::from_integer(BigInt::from(self.denominator.norm()));
        if !norm.is_integer() {
            return Err(IdealError::ReconstructionFailed(format!("non-integral norm for n = {n}")));
        }
        let norm = norm.to_integer().to_u128().ok_or(IdealError::NormOverflow)?;
        Ok(IdealFactorization { n, factors, norm })
    }
}

/// Factorization of (n+α)𝔞 into prime ideals.
pub fn factor_shift(n: i64, alpha: &AlphaParam) -> Result<IdealFactorization, IdealError> {
    ShiftContext::new(alpha)?.factor(n)
}

/// Integers n in (N, N+M] with a prime dividing (n+α)𝔞 and no other
/// (m+α)𝔞, 0 ≤ m ≤ N+M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CasselsBlock {
    pub start: u64,
    pub len: u64,
    pub private: Vec<PrivateShift>,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivateShift {
    pub n: u64,
    /// Every private prime of n, ascending; the first is the default witness.
    pub witnesses: Vec<PrimeIdeal>,
}

impl PrivateShift {
    /// The witness prime; with a seed, one of the private primes is drawn
    /// uniformly instead of taking the smallest.
    pub fn witness(&self, seed: Option<u64>) -> PrimeIdeal {
        match seed {
            None => self.witnesses[0],
            Some(s) => {
                let mut rng = ChaCha8Rng::seed_from_u64(s ^ self.n.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                self.witnesses[rng.random_range(0..self.witnesses.len())]
            }
        }
    }
}

/// Factorizations of (m+α)𝔞 for 0 ≤ m ≤ limit, with an index from each
/// prime to the m it divides.
#[derive(Debug, Clone)]
pub struct FactorTable {
    ctx: ShiftContext,
    rows: Vec<IdealFactorization>,
    occurrences: BTreeMap<PrimeIdeal, Vec<u64>>,
}

impl FactorTable {
    pub fn new(alpha: &AlphaParam) -> Result<Self, IdealError> {
        Ok(FactorTable {
            ctx: ShiftContext::new(alpha)?,
            rows: Vec::new(),
            occurrences: BTreeMap::new(),
        })
    }

    pub fn field(&self) -> &QuadraticField {
        &self.ctx.field
    }

    pub fn denominator(&self) -> &Ideal {
        &self.ctx.denominator
    }

    /// Number of factored shifts (m = 0..len).
    pub fn len(&self) -> u64 {
        self.rows.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn extend_to(&mut self, limit: u64) -> Result<(), IdealError> {
        let from = self.rows.len() as u64;
        if limit < from {
            return Ok(());
        }
        let ctx = &self.ctx;
        let new: Result<Vec<_>, _> = (from..=limit).into_par_iter().map(|m| ctx.factor(m as i64)).collect();
        for row in new? {
            for (p, _) in &row.factors {
                self.occurrences.entry(*p).or_default().push(row.n as u64);
            }
            self.rows.push(row);
        }
        Ok(())
    }

    pub fn factorization(&self, n: u64) -> Option<&IdealFactorization> {
        self.rows.get(n as usize)
    }

    /// The m ≤ limit (ascending) whose shift is divisible by `prime`.
    pub fn occurrences(&self, prime: &PrimeIdeal, limit: u64) -> &[u64] {
        match self.occurrences.get(prime) {
            Some(v) => &v[..v.partition_point(|m| *m <= limit)],
            None => &[],
        }
    }

    /// Primes dividing (n+α)𝔞 and no other (m+α)𝔞 with m ≤ limit.
    pub fn private_primes_of(&self, n: u64, limit: u64) -> Vec<PrimeIdeal> {
        let Some(row) = self.factorization(n) else {
            return Vec::new();
        };
        row.factors
            .iter()
            .map(|(p, _)| *p)
            .filter(|p| self.occurrences(p, limit) == [n])
            .collect()
    }

    pub fn block(&mut self, start: u64, len: u64) -> Result<CasselsBlock, IdealError> {
        let limit = start + len;
        self.extend_to(limit)?;
        let private: Vec<PrivateShift> = (start + 1..=limit)
            .filter_map(|n| {
                let w = self.private_primes_of(n, limit);
                (!w.is_empty()).then_some(PrivateShift { n, witnesses: w })
            })
            .collect();
        let density = if len == 0 { 0.0 } else { private.len() as f64 / len as f64 };
        Ok(CasselsBlock {
            start,
            len,
            private,
            density,
        })
    }
}

/// Exact determination of the private shifts in (N, N+M].
pub fn private_primes(start: u64, len: u64, alpha: &AlphaParam) -> Result<CasselsBlock, IdealError> {
    let mut table = FactorTable::new(alpha)?;
    table.block(start, len)
}

pub(crate) fn bigint_ln(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        let top: BigInt = &n >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub(crate) fn rational_ln(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    bigint_ln(r.numer()) - bigint_ln(r.denom())
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norms_recombine(n in -5000i64..5000, d in prop::sample::select(vec![2i64, 3, 5, 6, 7, 13, 17, 21])) {
            let alpha = AlphaParam::sqrt(d).unwrap();
            let fac = factor_shift(n, &alpha).unwrap();
            prop_assert!(fac.norm_recombines());
        }
    }
}
