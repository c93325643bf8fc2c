//! Software high-precision arithmetic for certificate recomputation.
//!
//! Only what the certificates need is provided: real arithmetic, the
//! elementary functions, real-argument Hurwitz zeta by Euler–Maclaurin with
//! exact Bernoulli numbers, and tails of periodic Dirichlet series.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::alpha::{AlphaKind, AlphaParam};
use crate::eval::PeriodicFunction;

/// Default number of decimal digits for the high-precision mode.
pub const DEFAULT_DIGITS: u32 = 40;

/// Precision selector shared by the modules that offer a high-precision path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Precision {
    Double,
    High { digits: u32 },
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Double
    }
}

pub struct HpContext {
    bits: usize,
    digits: u32,
    rm: RoundingMode,
    cc: Consts,
    bernoulli: Vec<BigFloat>,
}

impl HpContext {
    pub fn with_digits(digits: u32) -> Self {
        let digits = digits.max(20);
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
        let mut ctx = HpContext {
            bits,
            digits,
            rm: RoundingMode::ToEven,
            cc: Consts::new().expect("astro-float constants cache"),
            bernoulli: Vec::new(),
        };
        ctx.bernoulli = bernoulli_even(60)
            .iter()
            .map(|b| ctx.rational(b))
            .collect();
        ctx
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    pub fn from_u128(&mut self, n: u128) -> BigFloat {
        self.parse(&n.to_string())
    }

    pub fn parse(&mut self, s: &str) -> BigFloat {
        BigFloat::parse(s, Radix::Dec, self.bits, self.rm, &mut self.cc)
    }

    fn rational(&mut self, r: &BigRational) -> BigFloat {
        let n = self.parse(&r.numer().to_string());
        let d = self.parse(&r.denom().to_string());
        self.div(&n, &d)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, self.rm)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, self.rm)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, self.rm)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, self.rm)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.bits, self.rm)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.bits, self.rm, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.bits, self.rm, &mut self.cc)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.bits, self.rm, &mut self.cc)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.bits, self.rm, &mut self.cc)
    }

    /// x^{-σ} for x > 0.
    pub fn pow_neg(&mut self, x: &BigFloat, sigma: &BigFloat) -> BigFloat {
        let l = self.ln(x);
        let e = self.mul(&l, sigma).neg();
        self.exp(&e)
    }

    /// |re + i·im|.
    pub fn hypot(&self, re: &BigFloat, im: &BigFloat) -> BigFloat {
        let s = self.add(&self.mul(re, re), &self.mul(im, im));
        self.sqrt(&s)
    }

    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        x.to_string().parse().unwrap_or(f64::NAN)
    }

    /// The exact value of α at working precision.
    pub fn alpha(&mut self, alpha: &AlphaParam) -> BigFloat {
        match alpha.kind() {
            AlphaKind::Rational(r) => {
                let n = self.from_f64(r.num as f64);
                let d = self.from_f64(r.den as f64);
                self.div(&n, &d)
            }
            AlphaKind::Quadratic(q) => {
                let a = self.div(&self.from_f64(q.a.num as f64), &self.from_f64(q.a.den as f64));
                let b = self.div(&self.from_f64(q.b.num as f64), &self.from_f64(q.b.den as f64));
                let root = self.sqrt(&self.from_f64(q.d as f64));
                self.add(&a, &self.mul(&b, &root))
            }
            AlphaKind::Decimal(lit) => self.parse(lit),
        }
    }

    /// ζ(σ, a) for real σ > 1 and a > 0.
    pub fn hurwitz_real(&mut self, sigma: &BigFloat, a: &BigFloat) -> BigFloat {
        let sigma_f = self.to_f64(sigma);
        let a_f = self.to_f64(a);
        let target = -(self.digits as f64 + 8.0) * std::f64::consts::LN_10;
        let min_base = (2.0 * self.digits as f64).max(30.0);
        let mut m = (min_base - a_f).ceil().max(0.0) as u64;
        let terms = loop {
            let x = a_f + m as f64;
            let found = (1..self.bernoulli.len()).find(|&j| log_remainder(sigma_f, x, j) < target);
            match found {
                Some(j) => break j,
                None => m = (m * 2).max(16),
            }
        };

        let mut sum = BigFloat::from_f64(0.0, self.bits);
        for k in 0..m {
            let x = self.add(a, &self.from_f64(k as f64));
            let t = self.pow_neg(&x, sigma);
            sum = self.add(&sum, &t);
        }
        let x = self.add(a, &self.from_f64(m as f64));
        let xs = self.pow_neg(&x, sigma);
        let one = self.from_f64(1.0);
        let sm1 = self.sub(sigma, &one);
        sum = self.add(&sum, &self.div(&self.mul(&xs, &x), &sm1));
        sum = self.add(&sum, &self.mul(&xs, &self.from_f64(0.5)));

        // Σ_j B_{2j}/(2j)! (σ)_{2j-1} x^{-σ-2j+1}
        let x2 = self.mul(&x, &x);
        let mut pw = self.div(&xs, &x);
        let mut poch = sigma.clone();
        let mut fact = self.from_f64(2.0);
        for j in 1..=terms {
            let coeff = self.div(&self.bernoulli[j], &fact);
            let term = self.mul(&self.mul(&coeff, &poch), &pw);
            sum = self.add(&sum, &term);
            let k = 2.0 * j as f64 - 1.0;
            let s1 = self.add(sigma, &self.from_f64(k));
            let s2 = self.add(sigma, &self.from_f64(k + 1.0));
            poch = self.mul(&poch, &self.mul(&s1, &s2));
            pw = self.div(&pw, &x2);
            let f1 = self.from_f64((2 * j + 1) as f64);
            let f2 = self.from_f64((2 * j + 2) as f64);
            fact = self.mul(&fact, &self.mul(&f1, &f2));
        }
        sum
    }

    /// Σ_{n ≥ start} f(n)/(n+α)^σ for real σ > 1.
    pub fn tail_sum(
        &mut self,
        f: &PeriodicFunction,
        alpha: &BigFloat,
        sigma: &BigFloat,
        start: u128,
    ) -> BigFloat {
        let q = f.period() as u128;
        let qb = self.from_f64(q as f64);
        let scale = self.pow_neg(&qb, sigma);
        let mut sum = BigFloat::from_f64(0.0, self.bits);
        for r in 0..q {
            let fv = f.at_wide(start + r);
            if fv == 0.0 {
                continue;
            }
            let shift = self.from_u128(start + r);
            let a = self.div(&self.add(&shift, alpha), &qb);
            let z = self.hurwitz_real(sigma, &a);
            sum = self.add(&sum, &self.mul(&z, &self.from_f64(fv)));
        }
        self.mul(&sum, &scale)
    }

    /// Σ_{n ≤ last} f(n)/(n+α)^σ for real σ.
    pub fn head_sum(
        &mut self,
        f: &PeriodicFunction,
        alpha: &BigFloat,
        sigma: &BigFloat,
        last: u64,
    ) -> BigFloat {
        let mut sum = BigFloat::from_f64(0.0, self.bits);
        for n in 0..=last {
            let fv = f.at(n);
            if fv == 0.0 {
                continue;
            }
            let x = self.add(alpha, &self.from_f64(n as f64));
            let w = self.pow_neg(&x, sigma);
            let t = self.mul(&w, &self.from_f64(fv));
            sum = self.add(&sum, &t);
        }
        sum
    }
}

/// log of the Euler–Maclaurin remainder bound with `j` Bernoulli terms.
fn log_remainder(sigma: f64, x: f64, j: usize) -> f64 {
    let two_j = 2 * j;
    let log_poch: f64 = (0..two_j).map(|k| (sigma + k as f64).ln()).sum();
    let e = sigma + two_j as f64 - 1.0;
    4f64.ln() + log_poch - two_j as f64 * (2.0 * std::f64::consts::PI).ln() - e * x.ln() - e.ln()
}

/// B_0, B_2, …, B_{2k} as exact rationals (index j holds B_{2j}).
pub fn bernoulli_even(k: usize) -> Vec<BigRational> {
    let n = 2 * k;
    // B_m = -1/(m+1) Σ_{i<m} C(m+1, i) B_i
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (i, bi) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bi;
            binom = binom * BigInt::from(m + 1 - i) / BigInt::from(i + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_even(10);
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(b[1], r(1, 6));
        assert_eq!(b[2], r(-1, 30));
        assert_eq!(b[6], r(-691, 2730));
        assert_eq!(b[10], r(-174611, 330));
    }

    #[test]
    fn hp_zeta2() {
        let mut ctx = HpContext::with_digits(40);
        let two = ctx.from_f64(2.0);
        let one = ctx.from_f64(1.0);
        let z = ctx.hurwitz_real(&two, &one);
        // π²/6 to 40 digits
        let expected = ctx.parse("1.644934066848226436472415166646025189218949901206798437735558229");
        let diff = ctx.sub(&z, &expected).abs();
        assert!(ctx.to_f64(&diff) < 1e-38, "{}", z);
    }

    #[test]
    fn hp_tail_matches_double() {
        let mut ctx = HpContext::with_digits(30);
        let f: PeriodicFunction = "1,2,0.5".parse().unwrap();
        let alpha = AlphaParam::sqrt(2).unwrap();
        let a = ctx.alpha(&alpha);
        let sigma = ctx.from_f64(1.3);
        let tail = ctx.tail_sum(&f, &a, &sigma, 17);
        let expected = crate::eval::tail_after(
            num_complex::Complex64::new(1.3, 0.0),
            &f,
            alpha.value(),
            16,
            1e-13,
        )
        .unwrap();
        assert!((ctx.to_f64(&tail) - expected.re).abs() < 1e-11);
    }
}
