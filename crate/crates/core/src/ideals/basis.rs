//! A ℤ-basis of the multiplicative group generated by finitely many
//! positive elements of a real quadratic field.
//!
//! The valuation vectors of the generators are brought to Hermite normal
//! form with a tracked unimodular transform. Nonzero rows give basis
//! elements with independent ideal parts; zero rows are relations whose
//! products are units, all powers of the fundamental unit ε, and together
//! contribute the single basis element ε^g.

use std::collections::BTreeMap;

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{FieldElement, IdealError, PrimeIdeal, QuadraticField};
use crate::alpha::AlphaParam;
use crate::hp::HpContext;

/// Largest ω-coefficient tried in the fundamental-unit search.
const UNIT_SEARCH_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativeBasis {
    pub d: i64,
    /// The basis s_1..s_l, all positive.
    pub elements: Vec<FieldElement>,
    /// The represented elements, in input order.
    pub members: Vec<FieldElement>,
    /// members[i] = Π_j elements[j]^{exponents[i][j]}.
    pub exponents: Vec<Vec<i64>>,
    /// Index of the unit basis element, if any.
    pub unit_index: Option<usize>,
}

impl MultiplicativeBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn members(&self) -> &[FieldElement] {
        &self.members
    }

    pub fn exponents(&self) -> &[Vec<i64>] {
        &self.exponents
    }

    /// M = max |u_j| over all members.
    pub fn bound(&self) -> i64 {
        self.exponents
            .iter()
            .flatten()
            .map(|u| u.abs())
            .max()
            .unwrap_or(0)
    }

    /// ln s_j for each basis element.
    pub fn log_values(&self) -> Vec<f64> {
        self.elements.iter().map(FieldElement::ln_abs).collect()
    }

    pub fn member_hp(&self, ctx: &mut HpContext, member: &FieldElement) -> BigFloat {
        member.to_hp(ctx)
    }

    /// Exact check of every representation.
    pub fn verify(&self) -> bool {
        self.members.iter().zip(&self.exponents).all(|(m, u)| {
            let prod = self
                .elements
                .iter()
                .zip(u)
                .fold(FieldElement::one(self.d), |acc, (s, e)| acc.mul(&s.pow(*e)));
            &prod == m
        })
    }
}

/// Basis for the group generated by {n + α : n ∈ shifts}.
pub fn multiplicative_basis(alpha: &AlphaParam, shifts: &[i64]) -> Result<MultiplicativeBasis, IdealError> {
    let field = QuadraticField::of_alpha(alpha)?;
    let a = FieldElement::from_alpha(alpha)?;
    let elems: Vec<FieldElement> = shifts.iter().map(|n| a.add_integer(*n)).collect();
    multiplicative_basis_of(&field, &elems)
}

/// Basis for the group generated by the given positive elements.
pub fn multiplicative_basis_of(
    field: &QuadraticField,
    members: &[FieldElement],
) -> Result<MultiplicativeBasis, IdealError> {
    for m in members {
        if m.signum() <= 0 {
            return Err(IdealError::NotPositive(m.to_string()));
        }
    }
    let vals: Vec<BTreeMap<PrimeIdeal, i64>> = members
        .iter()
        .map(|m| field.valuations(m))
        .collect::<Result<_, _>>()?;
    let mut primes: Vec<PrimeIdeal> = vals.iter().flat_map(|v| v.keys().copied()).collect();
    primes.sort();
    primes.dedup();
    let matrix: Vec<Vec<BigInt>> = vals
        .iter()
        .map(|v| primes.iter().map(|p| BigInt::from(*v.get(p).unwrap_or(&0))).collect())
        .collect();

    let k = members.len();
    let hnf = hnf_with_transform(matrix);
    let to_i64 = |b: &BigInt| b.to_i64().ok_or(IdealError::NormOverflow);

    // products Π_m members[m]^{U[i][m]}
    let mut row_elems = Vec::with_capacity(k);
    for row in &hnf.u {
        let mut acc = FieldElement::one(field.d());
        for (m, e) in members.iter().zip(row) {
            let e = to_i64(e)?;
            if e != 0 {
                acc = acc.mul(&m.pow(e));
            }
        }
        row_elems.push(acc);
    }

    let mut elements: Vec<FieldElement> = row_elems[..hnf.rank].to_vec();
    let mut unit_exps: Vec<i64> = Vec::new();
    let mut unit = None;
    if hnf.rank < k {
        let eps = fundamental_unit(field)?;
        let log_eps = eps.ln_abs();
        for u in &row_elems[hnf.rank..] {
            let e = (u.ln_abs() / log_eps).round() as i64;
            if eps.pow(e) != *u {
                return Err(IdealError::ReconstructionFailed(format!("unit {u} is not a power of {eps}")));
            }
            unit_exps.push(e);
        }
        let g = unit_exps.iter().fold(0i64, |acc, e| acc.gcd(e));
        if g != 0 {
            unit = Some((elements.len(), g));
            elements.push(eps.pow(g));
        }
    }

    let mut exponents = Vec::with_capacity(k);
    for m in 0..k {
        let mut u: Vec<i64> = (0..hnf.rank).map(|i| to_i64(&hnf.uinv[m][i])).collect::<Result<_, _>>()?;
        if let Some((_, g)) = unit {
            let mut total = BigInt::zero();
            for (j, e) in unit_exps.iter().enumerate() {
                total += &hnf.uinv[m][hnf.rank + j] * BigInt::from(*e);
            }
            let (q, r) = total.div_rem(&BigInt::from(g));
            debug_assert!(r.is_zero());
            u.push(to_i64(&q)?);
        }
        exponents.push(u);
    }

    let basis = MultiplicativeBasis {
        d: field.d(),
        elements,
        members: members.to_vec(),
        exponents,
        unit_index: unit.map(|(i, _)| i),
    };
    if !basis.verify() {
        return Err(IdealError::ReconstructionFailed("basis representation".into()));
    }
    Ok(basis)
}

/// The fundamental unit ε > 1 of O_K for real K, by increasing ω-coefficient.
pub fn fundamental_unit(field: &QuadraticField) -> Result<FieldElement, IdealError> {
    let d = field.d();
    if d < 0 {
        return Err(IdealError::InvalidField(d));
    }
    let (t, c) = field.omega_poly();
    let omega = field.omega();
    for y in 1..=UNIT_SEARCH_LIMIT as i128 {
        let mut best: Option<(f64, i128)> = None;
        for target in [-1i128, 1] {
            // x² + t·y·x − (c·y² + target) = 0
            let disc = t * t * y * y + 4 * (c * y * y + target);
            if disc < 0 {
                continue;
            }
            let s = isqrt(disc);
            if s * s != disc {
                continue;
            }
            for num in [-t * y + s, -t * y - s] {
                if num % 2 != 0 {
                    continue;
                }
                let x = num / 2;
                let v = x as f64 + y as f64 * omega;
                if v > 1.0 + 1e-9 && best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, x));
                }
            }
        }
        if let Some((_, x)) = best {
            return Ok(FieldElement::from_omega(field, x, y));
        }
    }
    Err(IdealError::UnitSearchExhausted(UNIT_SEARCH_LIMIT, d))
}

fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

struct Hnf {
    /// Number of nonzero rows of the echelon form.
    rank: usize,
    u: Vec<Vec<BigInt>>,
    uinv: Vec<Vec<BigInt>>,
    #[allow(dead_code)]
    h: Vec<Vec<BigInt>>,
}

/// Row echelon form H = U·V with U unimodular, tracking U⁻¹ as well.
fn hnf_with_transform(v: Vec<Vec<BigInt>>) -> Hnf {
    let k = v.len();
    let cols = v.first().map_or(0, Vec::len);
    let mut h = v;
    let ident = |n: usize| -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect()
    };
    let mut u = ident(k);
    let mut uinv = ident(k);

    let mut row = 0;
    for col in 0..cols {
        if row == k {
            break;
        }
        loop {
            let pivot = (row..k)
                .filter(|&r| !h[r][col].is_zero())
                .min_by(|&a, &b| h[a][col].abs().cmp(&h[b][col].abs()));
            let Some(p) = pivot else { break };
            if p != row {
                h.swap(p, row);
                u.swap(p, row);
                for r in uinv.iter_mut() {
                    r.swap(p, row);
                }
            }
            let mut done = true;
            for r in row + 1..k {
                if h[r][col].is_zero() {
                    continue;
                }
                let q = h[r][col].div_floor(&h[row][col]);
                // row r -= q·row; inverse adds q·column r to column `row`
                for j in 0..cols {
                    let s = &q * &h[row][j];
                    h[r][j] -= s;
                }
                for j in 0..k {
                    let s = &q * &u[row][j];
                    u[r][j] -= s;
                }
                for line in uinv.iter_mut() {
                    let s = &q * &line[r];
                    line[row] += s;
                }
                if !h[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[row][col].is_zero() {
            continue;
        }
        if h[row][col].is_negative() {
            for x in h[row].iter_mut() {
                *x = -x.clone();
            }
            for x in u[row].iter_mut() {
                *x = -x.clone();
            }
            for line in uinv.iter_mut() {
                line[row] = -line[row].clone();
            }
        }
        row += 1;
    }
    Hnf { rank: row, u, uinv, h }
}
