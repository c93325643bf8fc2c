//! Exact elements x + y√d of ℚ(√d) with rational coordinates.

use std::fmt;

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{rational_ln, IdealError, QuadraticField};
use crate::alpha::{AlphaParam, Ratio};
use crate::hp::HpContext;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "ElementRepr", try_from = "ElementRepr")]
pub struct FieldElement {
    pub x: BigRational,
    pub y: BigRational,
    pub d: i64,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    x: String,
    y: String,
    d: i64,
}

impl From<FieldElement> for ElementRepr {
    fn from(e: FieldElement) -> Self {
        ElementRepr {
            x: e.x.to_string(),
            y: e.y.to_string(),
            d: e.d,
        }
    }
}

impl TryFrom<ElementRepr> for FieldElement {
    type Error = String;
    fn try_from(r: ElementRepr) -> Result<Self, Self::Error> {
        let x: BigRational = r.x.parse().map_err(|e| format!("{e:?}"))?;
        let y: BigRational = r.y.parse().map_err(|e| format!("{e:?}"))?;
        Ok(FieldElement { x, y, d: r.d })
    }
}

fn ratio(r: Ratio) -> BigRational {
    BigRational::new(BigInt::from(r.num), BigInt::from(r.den))
}

impl FieldElement {
    pub fn new(x: BigRational, y: BigRational, d: i64) -> Self {
        FieldElement { x, y, d }
    }

    pub fn one(d: i64) -> Self {
        FieldElement::new(BigRational::one(), BigRational::zero(), d)
    }

    pub fn from_alpha(alpha: &AlphaParam) -> Result<Self, IdealError> {
        let q = alpha.as_quadratic().ok_or(IdealError::NotQuadratic)?;
        Ok(FieldElement::new(ratio(q.a), ratio(q.b), q.d))
    }

    /// x + yω in the integral basis of `field`.
    pub fn from_omega(field: &QuadraticField, x: i128, y: i128) -> Self {
        let (t, _) = field.omega_poly();
        let x = BigRational::from_integer(BigInt::from(x));
        let y = BigRational::from_integer(BigInt::from(y));
        if t == 1 {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            FieldElement::new(x + &y * &half, y * half, field.d())
        } else {
            FieldElement::new(x, y, field.d())
        }
    }

    pub fn add_integer(&self, n: i64) -> Self {
        FieldElement::new(&self.x + BigRational::from_integer(BigInt::from(n)), self.y.clone(), self.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = BigRational::from_integer(BigInt::from(self.d));
        FieldElement::new(
            &self.x * &o.x + &d * &self.y * &o.y,
            &self.x * &o.y + &self.y * &o.x,
            self.d,
        )
    }

    /// x² − d·y².
    pub fn norm(&self, d: i64) -> BigRational {
        &self.x * &self.x - BigRational::from_integer(BigInt::from(d)) * &self.y * &self.y
    }

    pub fn inv(&self) -> Self {
        let n = self.norm(self.d);
        FieldElement::new(&self.x / &n, -&self.y / &n, self.d)
    }

    pub fn pow(&self, e: i64) -> Self {
        let mut base = if e < 0 { self.inv() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = FieldElement::one(self.d);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_one() && self.y.is_zero()
    }

    /// Sign of the real embedding with √d > 0 (d > 0 assumed), exactly.
    pub fn signum(&self) -> i32 {
        let sx = sign(&self.x);
        let sy = sign(&self.y);
        if sx == 0 || sy == 0 || sx == sy {
            return if sx != 0 { sx } else { sy };
        }
        let xx = &self.x * &self.x;
        let dyy = BigRational::from_integer(BigInt::from(self.d)) * &self.y * &self.y;
        if xx > dyy {
            sx
        } else {
            sy
        }
    }

    pub fn value(&self) -> f64 {
        self.x.to_f64().unwrap_or(f64::NAN) + self.y.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    /// ln|x + y√d|, stable for huge coordinates and for cancellation.
    pub fn ln_abs(&self) -> f64 {
        let half_ln_d = 0.5 * (self.d as f64).ln();
        let same = |a: &BigRational, b: &BigRational| {
            // ln(|a| + |b|√d)
            match (a.is_zero(), b.is_zero()) {
                (true, true) => f64::NEG_INFINITY,
                (false, true) => rational_ln(a),
                (true, false) => rational_ln(b) + half_ln_d,
                (false, false) => {
                    let la = rational_ln(a);
                    let lb = rational_ln(b) + half_ln_d;
                    let (hi, lo) = if la > lb { (la, lb) } else { (lb, la) };
                    hi + (lo - hi).exp().ln_1p()
                }
            }
        };
        if sign(&self.x) * sign(&self.y) >= 0 {
            same(&self.x, &self.y)
        } else {
            // x + y√d = N/(x − y√d) and x − y√d has no cancellation
            rational_ln(&self.norm(self.d).abs()) - same(&self.x, &self.y)
        }
    }

    /// Coordinates in the integral basis scaled to integers:
    /// self = (X + Yω)/D.
    pub fn integral_coords(&self, field: &QuadraticField) -> Result<(i128, i128, u128), IdealError> {
        let (t, _) = field.omega_poly();
        let (xr, yr) = if t == 1 {
            (&self.x - &self.y, &self.y * BigRational::from_integer(BigInt::from(2)))
        } else {
            (self.x.clone(), self.y.clone())
        };
        let den = xr.denom().lcm(yr.denom());
        let big_x = (xr * BigRational::from_integer(den.clone())).to_integer();
        let big_y = (yr * BigRational::from_integer(den.clone())).to_integer();
        let o = IdealError::NormOverflow;
        Ok((
            big_x.to_i128().ok_or(o.clone())?,
            big_y.to_i128().ok_or(o.clone())?,
            den.to_u128().ok_or(o)?,
        ))
    }

    pub fn to_hp(&self, ctx: &mut HpContext) -> BigFloat {
        let x = hp_ratio(ctx, &self.x);
        let y = hp_ratio(ctx, &self.y);
        let d = ctx.from_f64(self.d as f64);
        let root = ctx.sqrt(&d);
        ctx.add(&x, &ctx.mul(&y, &root))
    }
}

fn hp_ratio(ctx: &mut HpContext, r: &BigRational) -> BigFloat {
    let n = ctx.parse(&r.numer().to_string());
    let d = ctx.parse(&r.denom().to_string());
    ctx.div(&n, &d)
}

fn sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
    }
}
