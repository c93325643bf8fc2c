//! The shift parameter α of ζ(s, α) and L(s, f, α).
//!
//! Three encodings are accepted, matching the command line syntax:
//!
//! * `rat:p,q`: the rational p/q,
//! * `quad:a,b,d`: the quadratic irrational a + b√d, where `a` and `b` may
//!   themselves be written as `n` or `n/m`,
//! * `dec:<literal>`: a decimal literal, taken as exact at its stated
//!   precision (used as a stand-in for a transcendental number).

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphaError {
    #[error("alpha must be positive, got {0}")]
    NotPositive(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("quadratic alpha needs b != 0 and a radicand that is not a perfect square")]
    NotIrrational,
    #[error("malformed alpha `{0}` (expected rat:p,q | quad:a,b,d | dec:<literal>)")]
    Malformed(String),
}

/// A reduced rational number `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Result<Self, AlphaError> {
        if den == 0 {
            return Err(AlphaError::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Ratio {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: i64) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = AlphaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlphaError::Malformed(s.to_string());
        match s.trim().split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse().map_err(|_| bad())?;
                let d = d.trim().parse().map_err(|_| bad())?;
                Ratio::new(n, d)
            }
            None => Ok(Ratio::integer(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

/// a + b√d with rational a, b and square-free d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticAlpha {
    pub a: Ratio,
    pub b: Ratio,
    pub d: i64,
}

impl QuadraticAlpha {
    /// Builds a + b√d, pulling square factors of `d` into `b`.
    pub fn new(a: Ratio, b: Ratio, d: i64) -> Result<Self, AlphaError> {
        if b.is_zero() || d == 0 || d == 1 {
            return Err(AlphaError::NotIrrational);
        }
        let (square, core) = split_square(d);
        if core == 1 {
            return Err(AlphaError::NotIrrational);
        }
        let b = Ratio::new(b.num * square, b.den)?;
        Ok(QuadraticAlpha { a, b, d: core })
    }

    pub fn value(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * (self.d as f64).sqrt()
    }
}

/// Writes d = s²·c with c square-free; returns (s, c).
fn split_square(d: i64) -> (i64, i64) {
    let sign = d.signum();
    let mut rest = d.abs();
    let mut square = 1;
    let mut p = 2;
    while p * p <= rest {
        while rest % (p * p) == 0 {
            rest /= p * p;
            square *= p;
        }
        p += 1;
    }
    (square, sign * rest)
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaKind {
    Rational(Ratio),
    Quadratic(QuadraticAlpha),
    /// Decimal literal; transcendence is the caller's assumption.
    Decimal(String),
}

/// The shift α > 0 together with its exact description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AlphaParam {
    kind: AlphaKind,
    value: f64,
}

impl AlphaParam {
    pub fn rational(p: i64, q: i64) -> Result<Self, AlphaError> {
        let r = Ratio::new(p, q)?;
        Self::from_kind(AlphaKind::Rational(r), r.to_f64())
    }

    pub fn quadratic(a: Ratio, b: Ratio, d: i64) -> Result<Self, AlphaError> {
        let q = QuadraticAlpha::new(a, b, d)?;
        if q.d < 0 {
            return Err(AlphaError::NotPositive(format!("{a}+{b}*sqrt({d})")));
        }
        Self::from_kind(AlphaKind::Quadratic(q), q.value())
    }

    /// √d for a non-square positive d.
    pub fn sqrt(d: i64) -> Result<Self, AlphaError> {
        Self::quadratic(Ratio::integer(0), Ratio::integer(1), d)
    }

    pub fn decimal(literal: &str) -> Result<Self, AlphaError> {
        let literal = literal.trim();
        let value: f64 = literal
            .parse()
            .map_err(|_| AlphaError::Malformed(literal.to_string()))?;
        Self::from_kind(AlphaKind::Decimal(literal.to_string()), value)
    }

    /// A plain positive real, recorded as a decimal literal.
    pub fn real(value: f64) -> Result<Self, AlphaError> {
        Self::decimal(&format!("{value:e}"))
    }

    fn from_kind(kind: AlphaKind, value: f64) -> Result<Self, AlphaError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(AlphaError::NotPositive(value.to_string()));
        }
        Ok(AlphaParam { kind, value })
    }

    pub fn kind(&self) -> &AlphaKind {
        &self.kind
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticAlpha> {
        match &self.kind {
            AlphaKind::Quadratic(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for AlphaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AlphaKind::Rational(r) => write!(f, "rat:{},{}", r.num, r.den),
            AlphaKind::Quadratic(q) => write!(f, "quad:{},{},{}", q.a, q.b, q.d),
            AlphaKind::Decimal(lit) => write!(f, "dec:{lit}"),
        }
    }
}

impl FromStr for AlphaParam {
    type Err = AlphaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlphaError::Malformed(s.to_string());
        let (tag, body) = s.trim().split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        match (tag, parts.as_slice()) {
            ("rat", [p, q]) => {
                AlphaParam::rational(p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?)
            }
            ("quad", [a, b, d]) => {
                AlphaParam::quadratic(a.parse()?, b.parse()?, d.parse().map_err(|_| bad())?)
            }
            ("dec", [lit]) => AlphaParam::decimal(lit),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for AlphaParam {
    type Error = AlphaError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AlphaParam> for String {
    fn from(a: AlphaParam) -> String {
        a.to_string()
    }
}
