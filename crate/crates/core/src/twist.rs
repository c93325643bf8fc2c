//! Twisted series F(s) = Σ f(n) w(n) (n+α)^{−s} with unimodular weights.
//!
//! Two weight rules are provided. The sign flip (+1 up to an index m, −1
//! after) gives a function with a real zero just right of 1. The character
//! rule assigns w(n) = χ(n+α) for a character χ on ideals that is built block
//! by block so that the partial sums stay below 1% of the remaining tail.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use astro_float::BigFloat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alpha::AlphaParam;
use crate::annulus::{self, AnnulusSpec};
use crate::eval::{self, pow_neg, tail_after, EvalError, PeriodicFunction};
use crate::hp::{HpContext, Precision};
use crate::ideals::{FactorTable, IdealError, PrimeIdeal};

/// σ − 1 below which the sign-change search gives up.
pub const SIGMA_FLOOR: f64 = 1e-8;

/// Up to this index the head of the sign-flip series is summed directly.
const DIRECT_HEAD_LIMIT: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwistError {
    #[error("the residue of f vanishes, so no head can dominate the tail")]
    NoSuchIndex,
    #[error("no sign change of F on (1, 1+delta]: {0}")]
    SignChangeNotBracketed(String),
    #[error("block {block}: annulus of the A-weights has inner radius {inner:e} > 0 ({size} terms)")]
    AnnulusGap { block: usize, inner: f64, size: usize },
    #[error("no sigma satisfies the starting inequality: {0}")]
    CaseUnreachable(String),
    #[error("block {block}: S3/S2 = {ratio} does not exceed 101/99")]
    RatioViolated { block: usize, ratio: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

/// Unimodular weight rule of a twisted series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Weights {
    /// +1 for n ≤ m, −1 for n > m.
    SignFlip { m: u128 },
    /// w(n) = e^{i·angles[n]} for n < angles.len(); unknown beyond.
    Character { angles: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistedSeries {
    pub f: PeriodicFunction,
    pub alpha: AlphaParam,
    pub weights: Weights,
}

impl TwistedSeries {
    pub fn sign_flip(f: PeriodicFunction, alpha: AlphaParam, m: u128) -> Self {
        TwistedSeries {
            f,
            alpha,
            weights: Weights::SignFlip { m },
        }
    }

    pub fn weight(&self, n: u128) -> Option<Complex64> {
        match &self.weights {
            Weights::SignFlip { m } => Some(Complex64::new(if n <= *m { 1.0 } else { -1.0 }, 0.0)),
            Weights::Character { angles } => angles.get(n as usize).map(|a| Complex64::from_polar(1.0, *a)),
        }
    }

    /// F(s) for σ > 1. Sign-flip series only; character series are known on
    /// a finite range and are evaluated through [`Self::partial_sum`].
    pub fn eval(&self, s: Complex64, tol: f64) -> Result<Complex64, TwistError> {
        let Weights::SignFlip { m } = self.weights else {
            return Err(TwistError::Invalid("character series are only known on a finite range".into()));
        };
        let a = self.alpha.value();
        if m <= DIRECT_HEAD_LIMIT {
            // F = 2·head − L
            let mut head = Complex64::new(0.0, 0.0);
            for n in 0..=m as u64 {
                let fv = self.f.at(n);
                if fv != 0.0 {
                    head += pow_neg(n as f64 + a, s) * fv;
                }
            }
            let l = eval::lfunction_at(s, &self.f, a, tol / 2.0)?;
            Ok(head * 2.0 - l)
        } else {
            // F = L − 2·tail
            let l = eval::lfunction_at(s, &self.f, a, tol / 2.0)?;
            let tail = tail_after(s, &self.f, a, m, tol / 4.0)?;
            Ok(l - tail * 2.0)
        }
    }

    /// Σ_{n ≤ last} f(n) w(n) (n+α)^{−s}.
    pub fn partial_sum(&self, s: Complex64, last: u64) -> Option<Complex64> {
        let a = self.alpha.value();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..=last {
            let w = self.weight(n as u128)?;
            acc += w * pow_neg(n as f64 + a, s) * self.f.at(n);
        }
        Some(acc)
    }
}

/// f or −f, whichever has positive residue.
fn normalized(f: &PeriodicFunction) -> Result<PeriodicFunction, TwistError> {
    let r = eval::residue(f);
    if r > 0.0 {
        Ok(f.clone())
    } else if r < 0.0 {
        Ok(f.negated())
    } else {
        Err(TwistError::NoSuchIndex)
    }
}

/// Smallest m with Σ_{n≤m} f(n)/(n+α)^{1+δ} > Σ_{n>m} f(n)/(n+α)^{1+δ},
/// after replacing f by −f if its residue is negative.
pub fn truncation_index(f: &PeriodicFunction, alpha: &AlphaParam, delta: f64) -> Result<u128, TwistError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(TwistError::Invalid(format!("delta = {delta} must be positive")));
    }
    let f = normalized(f)?;
    let a = alpha.value();
    let s = Complex64::new(1.0 + delta, 0.0);
    let tol = 1e-13_f64.max(1e-15 / delta);
    let total = eval::lfunction_at(s, &f, a, tol)?.re;
    // head(m) > tail(m) ⇔ tail(m) < total/2
    let holds = |m: u128| -> Result<bool, TwistError> {
        Ok(tail_after(s, &f, a, m, tol)?.re < total / 2.0)
    };

    if f.values().iter().all(|v| *v >= 0.0) {
        // the tail is decreasing in m: gallop, then bisect
        if holds(0)? {
            return Ok(0);
        }
        let mut lo: u128 = 0;
        let mut hi: u128 = 1;
        while !holds(hi)? {
            lo = hi;
            hi = hi.checked_mul(2).ok_or(TwistError::NoSuchIndex)?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(hi);
    }

    // mixed signs: scan directly, then move in whole periods
    let mut head = 0.0;
    for m in 0..DIRECT_HEAD_LIMIT as u64 {
        head += f.at(m) * (m as f64 + a).powf(-(1.0 + delta));
        if 2.0 * head > total {
            return Ok(m as u128);
        }
    }
    if total <= 0.0 {
        // the tail is eventually positive, so it never drops below total/2
        return Err(TwistError::NoSuchIndex);
    }
    let q = f.period() as u128;
    let mut lo = DIRECT_HEAD_LIMIT / q;
    let mut hi = lo.max(1) * 2;
    while !holds(hi.checked_mul(q).ok_or(TwistError::NoSuchIndex)?)? {
        lo = hi;
        hi = hi.checked_mul(2).ok_or(TwistError::NoSuchIndex)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid * q)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut m = hi * q;
    // step back inside the period
    while m > lo * q && holds(m - 1)? {
        m -= 1;
    }
    Ok(m)
}

/// A zero σ₀ ∈ (1, 1+δ) of the sign-flip series by bisection.
pub fn find_sigma0(series: &TwistedSeries, delta: f64, tol: f64) -> Result<f64, TwistError> {
    let Weights::SignFlip { m } = series.weights else {
        return Err(TwistError::Invalid("find_sigma0 needs a sign-flip series".into()));
    };
    let f = if eval::residue(&series.f) < 0.0 {
        series.f.negated()
    } else {
        series.f.clone()
    };
    let g = TwistedSeries::sign_flip(f, series.alpha.clone(), m);
    let value = |sigma: f64| -> Result<f64, TwistError> {
        let eps = (sigma - 1.0).max(1e-300);
        let eval_tol = (1e-12 / eps).max(1e-13);
        Ok(g.eval(Complex64::new(sigma, 0.0), eval_tol)?.re)
    };

    let mut hi = 1.0 + delta;
    let f_hi = value(hi)?;
    if !(f_hi > 0.0) {
        return Err(TwistError::SignChangeNotBracketed(format!("F(1+delta) = {f_hi:e} is not positive")));
    }
    let mut lo = f64::NAN;
    let mut step = delta;
    loop {
        step /= 2.0;
        if step < SIGMA_FLOOR {
            break;
        }
        let sigma = 1.0 + step;
        let v = value(sigma)?;
        if v < 0.0 {
            lo = sigma;
            break;
        }
        hi = sigma;
    }
    if lo.is_nan() {
        return Err(TwistError::SignChangeNotBracketed(format!(
            "F stays nonnegative down to sigma - 1 = {SIGMA_FLOOR:e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = value(mid)?;
        if v.abs() <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The correction z of the greedy step: −Λ if 0 < |Λ| ≤ S₃,
/// −S₃Λ/|Λ| if |Λ| > S₃, and 0 if Λ = 0.
pub fn z_rule(lambda: Complex64, s3: f64) -> Complex64 {
    let m = lambda.norm();
    if m == 0.0 {
        Complex64::new(0.0, 0.0)
    } else if m <= s3 {
        -lambda
    } else {
        -lambda * (s3 / m)
    }
}

/// Running ledger of the block induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyState {
    pub j: usize,
    pub lambda: Complex64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub z: Complex64,
    /// The partial sum through the end of the block after the correction.
    pub partial: Complex64,
}

/// Inputs of one greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInput<'a> {
    pub j: usize,
    /// Σ_{n ≤ N_j} f(n)χ(n+α)(n+α)^{−σ}.
    pub head: Complex64,
    /// Σ over 𝔅 of f(n)χ(n+α)(n+α)^{−σ}.
    pub b_sum: Complex64,
    /// S₂ = Σ over 𝔅 of f(n)(n+α)^{−σ}.
    pub b_weight: f64,
    /// f(n)(n+α)^{−σ} for n ∈ 𝔄, in ascending order.
    pub a_weights: &'a [f64],
    pub s4: f64,
}

/// One block: chooses z by the z-rule and phases on 𝔄 realizing it.
/// Returned angles are aligned with `a_weights`.
pub fn greedy_step(input: &BlockInput<'_>) -> Result<(GreedyState, Vec<f64>), TwistError> {
    let lambda = input.head + input.b_sum;
    let s3: f64 = input.a_weights.iter().sum();
    let z = z_rule(lambda, s3);
    let angles = if input.a_weights.is_empty() {
        Vec::new()
    } else {
        let spec = AnnulusSpec::new(input.a_weights).map_err(|e| TwistError::Invalid(e.to_string()))?;
        if spec.inner() > 0.0 {
            return Err(TwistError::AnnulusGap {
                block: input.j,
                inner: spec.inner(),
                size: input.a_weights.len(),
            });
        }
        let r = annulus::realize(&spec, z, 1e-12 * s3.max(1e-300))
            .map_err(|e| TwistError::Invalid(e.to_string()))?;
        r.angles
    };
    let realized: Complex64 = input
        .a_weights
        .iter()
        .zip(&angles)
        .map(|(w, a)| Complex64::from_polar(*w, *a))
        .sum();
    let state = GreedyState {
        j: input.j,
        lambda,
        s1: input.head.norm(),
        s2: input.b_weight,
        s3,
        s4: input.s4,
        z,
        partial: lambda + realized,
    };
    Ok((state, angles))
}

/// Parameters of the block schedule N_{j+1} = N_j + M_j,
/// M_j = max(1, ⌊N_j·num/den⌋).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub n1: u64,
    pub blocks: usize,
    pub scale_num: u64,
    pub scale_den: u64,
    pub delta: f64,
    /// Fixed exponent; searched from the starting inequality when absent.
    pub sigma: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            n1: 1000,
            blocks: 50,
            scale_num: 1,
            scale_den: 100,
            delta: 0.5,
            sigma: None,
        }
    }
}

impl ScheduleConfig {
    pub fn block_len(&self, n: u64) -> u64 {
        ((n as u128 * self.scale_num as u128 / self.scale_den as u128) as u64).max(1)
    }
}

/// The realized schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub sigma: f64,
    pub scale: (u64, u64),
    pub blocks: Vec<ScheduleBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleBlock {
    pub start: u64,
    pub len: u64,
    pub a_set: Vec<u64>,
    pub b_set: Vec<u64>,
}

/// Where the sets 𝔄 come from.
pub enum SetSource {
    /// Private shifts found by ideal factorization of n + α.
    Authentic,
    /// Caller-supplied 𝔄 for each block; χ is free on 𝔄 and 1 elsewhere.
    Synthetic(Vec<Vec<u64>>),
}

/// Per-block ledger row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub j: usize,
    pub start: u64,
    pub len: u64,
    pub a_size: usize,
    pub b_size: usize,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub lambda: Complex64,
    pub z: Complex64,
    /// |Σ_{n ≤ N_{j+1}} f(n)χ(n+α)(n+α)^{−σ}|.
    pub partial_abs: f64,
    /// max(0, S₁ + S₂ − S₃).
    pub bound: f64,
    pub bound_ok: bool,
    /// |partial| < S₄/100.
    pub eqalg_ok: bool,
    /// S₁ + S₂ − S₃ < S₄/100.
    pub chain_ok: bool,
    pub ratio: f64,
    /// S₃/S₂ > 101/99 (reported, not fatal).
    pub ratio_ok: bool,
    /// 100(S₃ − S₂) > S₃ + S₂.
    pub new_ok: bool,
    /// max over n, m ∈ 𝔄 of the weight ratio.
    pub pair_ratio: f64,
    pub pair_ok: bool,
    pub hp: Option<HpCheck>,
}

/// The block inequalities recomputed from scratch in software precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpCheck {
    pub digits: u32,
    pub partial_abs: String,
    pub s1: String,
    pub s2: String,
    pub s3: String,
    pub s4: String,
    pub eqalg_ok: bool,
    pub chain_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Outcome {
    Completed,
    Halted { block: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionReport {
    pub sigma: f64,
    pub n1: u64,
    /// Σ_{n ≤ N₁} and Σ_{n > N₁} at σ, the two sides of the start condition.
    pub case_head: f64,
    pub case_tail: f64,
    pub ratio_c: Option<f64>,
    pub rows: Vec<BlockReport>,
    pub ratio_violations: Vec<(usize, f64)>,
    pub schedule: BlockSchedule,
    pub outcome: Outcome,
}

fn case_sides(f: &PeriodicFunction, a: f64, sigma: f64, n1: u64) -> Result<(f64, f64), TwistError> {
    let s = Complex64::new(sigma, 0.0);
    let head: f64 = (0..=n1).map(|n| f.at(n) * (n as f64 + a).powf(-sigma)).sum();
    let tol = (1e-12 / (sigma - 1.0)).max(1e-13);
    let tail = tail_after(s, f, a, n1 as u128, tol)?.re;
    Ok((head, tail))
}

/// The first σ = 1 + min(δ,1)·2^{−k}, k ≥ 1, with
/// Σ_{n ≤ N₁} f(n)(n+α)^{−σ} < 10⁻² Σ_{n > N₁} f(n)(n+α)^{−σ}.
pub fn choose_sigma(f: &PeriodicFunction, alpha: &AlphaParam, n1: u64, delta: f64) -> Result<f64, TwistError> {
    let a = alpha.value();
    let mut step = delta.min(1.0);
    loop {
        step /= 2.0;
        if step < SIGMA_FLOOR {
            return Err(TwistError::CaseUnreachable(format!(
                "no sigma in (1, 1 + {}) down to sigma - 1 = {SIGMA_FLOOR:e}",
                delta.min(1.0)
            )));
        }
        let (head, tail) = case_sides(f, a, 1.0 + step, n1)?;
        if head < 0.01 * tail {
            return Ok(1.0 + step);
        }
    }
}

struct HpLedger {
    ctx: HpContext,
    alpha: BigFloat,
    sigma: BigFloat,
    /// Per n: (f(n)(n+α)^{−σ}, its real and imaginary parts after χ).
    terms: Vec<(BigFloat, BigFloat, BigFloat)>,
}

impl HpLedger {
    fn new(digits: u32, alpha: &AlphaParam, sigma: f64) -> Self {
        let mut ctx = HpContext::with_digits(digits);
        let a = ctx.alpha(alpha);
        let s = ctx.from_f64(sigma);
        HpLedger {
            ctx,
            alpha: a,
            sigma: s,
            terms: Vec::new(),
        }
    }

    fn push(&mut self, n: u64, fv: f64, angle: f64) {
        debug_assert_eq!(self.terms.len() as u64, n);
        let x = self.ctx.add(&self.alpha, &self.ctx.from_f64(n as f64));
        let w = self.ctx.pow_neg(&x, &self.sigma);
        let w = self.ctx.mul(&w, &self.ctx.from_f64(fv));
        let th = self.ctx.from_f64(angle);
        let (c, s) = (self.ctx.cos(&th), self.ctx.sin(&th));
        let re = self.ctx.mul(&w, &c);
        let im = self.ctx.mul(&w, &s);
        self.terms.push((w, re, im));
    }

    fn zero(&self) -> BigFloat {
        self.ctx.from_f64(0.0)
    }

    fn check(
        &mut self,
        f: &PeriodicFunction,
        block: &ScheduleBlock,
        a_members: &[u64],
    ) -> HpCheck {
        let end = block.start + block.len;
        let (mut hr, mut hi) = (self.zero(), self.zero());
        for (_, re, im) in &self.terms[..=block.start as usize] {
            hr = self.ctx.add(&hr, re);
            hi = self.ctx.add(&hi, im);
        }
        let s1 = self.ctx.hypot(&hr, &hi);
        let (mut pr, mut pi) = (hr, hi);
        let mut s2 = self.zero();
        let mut s3 = self.zero();
        for n in block.start + 1..=end {
            let (w, re, im) = &self.terms[n as usize];
            pr = self.ctx.add(&pr, re);
            pi = self.ctx.add(&pi, im);
            if a_members.binary_search(&n).is_ok() {
                s3 = self.ctx.add(&s3, w);
            } else {
                s2 = self.ctx.add(&s2, w);
            }
        }
        let partial = self.ctx.hypot(&pr, &pi);
        let s4 = {
            let (alpha, sigma) = (self.alpha.clone(), self.sigma.clone());
            self.ctx.tail_sum(f, &alpha, &sigma, end as u128 + 1)
        };
        let hundredth = self.ctx.from_f64(0.01);
        let limit = self.ctx.mul(&s4, &hundredth);
        let chain = self.ctx.sub(&self.ctx.add(&s1, &s2), &s3);
        let show = |x: &BigFloat| format!("{}", x);
        HpCheck {
            digits: self.ctx.digits(),
            partial_abs: show(&partial),
            s1: show(&s1),
            s2: show(&s2),
            s3: show(&s3),
            s4: show(&s4),
            eqalg_ok: partial < limit,
            chain_ok: chain < limit,
        }
    }
}

/// Runs the block induction for positive f and quadratic α.
///
/// χ is 1 on primes dividing 𝔞 or (n+α)𝔞 with n ≤ N₁ and on every prime that
/// is neither already assigned nor the chosen private prime of a shift in 𝔄.
/// On 𝔄 the private prime's value is set so that χ(n+α) has the phase
/// chosen by the greedy step. `chi_seed` picks the private prime among
/// several candidates.
pub fn run_schedule(
    f: &PeriodicFunction,
    alpha: &AlphaParam,
    config: &ScheduleConfig,
    source: SetSource,
    chi_seed: Option<u64>,
    precision: Precision,
) -> Result<InductionReport, TwistError> {
    if f.values().iter().any(|v| !(*v > 0.0)) {
        return Err(TwistError::Invalid("the block induction needs f > 0".into()));
    }
    if config.n1 == 0 || config.scale_den == 0 {
        return Err(TwistError::Invalid("n1 and the scale denominator must be positive".into()));
    }
    let a = alpha.value();
    let sigma = match config.sigma {
        Some(s) => s,
        None => choose_sigma(f, alpha, config.n1, config.delta)?,
    };
    if !(sigma > 1.0) {
        return Err(TwistError::Invalid(format!("sigma = {sigma} must exceed 1")));
    }
    let (case_head, case_tail) = case_sides(f, a, sigma, config.n1)?;
    if !(case_head < 0.01 * case_tail) {
        return Err(TwistError::CaseUnreachable(format!(
            "at sigma = {sigma}: head {case_head:e} >= tail/100 = {:e}",
            0.01 * case_tail
        )));
    }

    let mut table = match source {
        SetSource::Authentic => Some(FactorTable::new(alpha)?),
        SetSource::Synthetic(_) => None,
    };
    let synthetic = match &source {
        SetSource::Synthetic(sets) => Some(sets.clone()),
        SetSource::Authentic => None,
    };

    let mut hp = match precision {
        Precision::High { digits } => Some(HpLedger::new(digits, alpha, sigma)),
        Precision::Double => None,
    };

    let weight = |n: u64| f.at(n) * (n as f64 + a).powf(-sigma);
    let mut angles: Vec<f64> = Vec::new();
    let mut chi: BTreeMap<PrimeIdeal, f64> = BTreeMap::new();

    // first block and the denominator: χ = 1
    if let Some(t) = table.as_mut() {
        t.extend_to(config.n1)?;
        for (p, _) in t.denominator().factors.clone() {
            chi.insert(p, 0.0);
        }
        for n in 0..=config.n1 {
            for (p, _) in &t.factorization(n).expect("extended").factors {
                chi.insert(*p, 0.0);
            }
        }
    }
    let mut partial = Complex64::new(0.0, 0.0);
    for n in 0..=config.n1 {
        angles.push(0.0);
        partial += weight(n);
        if let Some(h) = hp.as_mut() {
            h.push(n, f.at(n), 0.0);
        }
    }

    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    let mut ratio_violations = Vec::new();
    let mut outcome = Outcome::Completed;
    let mut start = config.n1;

    for j in 1..=config.blocks {
        let len = config.block_len(start);
        let end = start + len;

        let (a_set, witnesses): (Vec<u64>, Vec<PrimeIdeal>) = match (&mut table, &synthetic) {
            (Some(t), _) => {
                let block = t.block(start, len)?;
                block.private.iter().map(|p| (p.n, p.witness(chi_seed))).unzip()
            }
            (None, Some(sets)) => {
                let mut s: Vec<u64> = sets
                    .get(j - 1)
                    .cloned()
                    .unwrap_or_default()
                    .into_iter()
                    .filter(|n| *n > start && *n <= end)
                    .collect();
                s.sort_unstable();
                s.dedup();
                let w = vec![PrimeIdeal { p: 0, root: None }; s.len()];
                (s, w)
            }
            (None, None) => unreachable!(),
        };
        let b_set: Vec<u64> = (start + 1..=end).filter(|n| a_set.binary_search(n).is_err()).collect();

        // χ on 𝔅: known primes keep their values, new ones get 1
        let mut b_sum = Complex64::new(0.0, 0.0);
        let mut b_weight = 0.0;
        let mut b_angles = Vec::with_capacity(b_set.len());
        for &n in &b_set {
            let th = match &table {
                Some(t) => {
                    let mut th = 0.0;
                    for (p, e) in &t.factorization(n).expect("extended").factors {
                        th += *e as f64 * *chi.entry(*p).or_insert(0.0);
                    }
                    th.rem_euclid(TAU)
                }
                None => 0.0,
            };
            let w = weight(n);
            b_sum += Complex64::from_polar(w, th);
            b_weight += w;
            b_angles.push(th);
        }

        // 𝔄 sorted by weight ascending for the annulus realization
        let mut order: Vec<usize> = (0..a_set.len()).collect();
        order.sort_by(|&x, &y| weight(a_set[x]).total_cmp(&weight(a_set[y])));
        let a_weights: Vec<f64> = order.iter().map(|&i| weight(a_set[i])).collect();
        let s4 = tail_after(Complex64::new(sigma, 0.0), f, a, end as u128, (1e-12 / (sigma - 1.0)).max(1e-13))?.re;

        let input = BlockInput {
            j,
            head: partial,
            b_sum,
            b_weight,
            a_weights: &a_weights,
            s4,
        };
        let step = greedy_step(&input);
        let (state, realized) = match step {
            Ok(v) => v,
            Err(e) => {
                blocks.push(ScheduleBlock {
                    start,
                    len,
                    a_set: a_set.clone(),
                    b_set,
                });
                outcome = Outcome::Halted {
                    block: j,
                    reason: e.to_string(),
                };
                break;
            }
        };

        // assign χ on the private primes so that χ(n+α) has the chosen phase
        let mut a_angle = vec![0.0; a_set.len()];
        for (k, &i) in order.iter().enumerate() {
            a_angle[i] = realized[k];
        }
        let mut new_angles: BTreeMap<u64, f64> = b_set.iter().copied().zip(b_angles).collect();
        for (i, &n) in a_set.iter().enumerate() {
            let target = a_angle[i];
            if let Some(t) = &table {
                let fac = &t.factorization(n).expect("extended").factors;
                let wit = witnesses[i];
                let mut known = 0.0;
                let mut nu = 1.0;
                for (p, e) in fac {
                    if *p == wit {
                        nu = *e as f64;
                    } else {
                        known += *e as f64 * *chi.entry(*p).or_insert(0.0);
                    }
                }
                chi.insert(wit, ((target - known) / nu).rem_euclid(TAU));
                // replay the product to get the realized phase
                let th: f64 = fac.iter().map(|(p, e)| *e as f64 * chi[p]).sum();
                new_angles.insert(n, th.rem_euclid(TAU));
            } else {
                new_angles.insert(n, target);
            }
        }
        for n in start + 1..=end {
            let th = new_angles[&n];
            angles.push(th);
            if let Some(h) = hp.as_mut() {
                h.push(n, f.at(n), th);
            }
        }

        // recompute the partial sum through N_{j+1} from the stored phases
        partial = (0..=end).map(|n| Complex64::from_polar(weight(n), angles[n as usize])).sum();

        let block = ScheduleBlock {
            start,
            len,
            a_set: a_set.clone(),
            b_set: b_set.clone(),
        };
        let bound = (state.s1 + state.s2 - state.s3).max(0.0);
        let slack = 1e-9 * (state.s1 + state.s2 + state.s3) + 1e-12;
        let ratio = if state.s2 == 0.0 { f64::INFINITY } else { state.s3 / state.s2 };
        let pair_ratio = if a_weights.is_empty() {
            1.0
        } else {
            a_weights[a_weights.len() - 1] / a_weights[0]
        };
        let hp_check = hp.as_mut().map(|h| h.check(f, &block, &a_set));
        let row = BlockReport {
            j,
            start,
            len,
            a_size: a_set.len(),
            b_size: b_set.len(),
            s1: state.s1,
            s2: state.s2,
            s3: state.s3,
            s4: state.s4,
            lambda: state.lambda,
            z: state.z,
            partial_abs: partial.norm(),
            bound,
            bound_ok: partial.norm() <= bound + slack,
            eqalg_ok: partial.norm() < 0.01 * state.s4,
            chain_ok: state.s1 + state.s2 - state.s3 < 0.01 * state.s4,
            ratio,
            ratio_ok: ratio > 101.0 / 99.0,
            new_ok: 100.0 * (state.s3 - state.s2) > state.s3 + state.s2,
            pair_ratio,
            pair_ok: pair_ratio < 3.0,
            hp: hp_check,
        };
        if !row.ratio_ok {
            ratio_violations.push((j, ratio));
        }
        let failed = if !row.bound_ok {
            Some("partial sum exceeds max(0, S1 + S2 - S3)")
        } else if !row.eqalg_ok {
            Some("|partial| >= S4/100")
        } else if !row.chain_ok {
            Some("S1 + S2 - S3 >= S4/100")
        } else if row.hp.as_ref().is_some_and(|h| !(h.eqalg_ok && h.chain_ok)) {
            Some("high-precision recomputation violates the block inequalities")
        } else {
            None
        };
        rows.push(row);
        blocks.push(block);
        if let Some(reason) = failed {
            outcome = Outcome::Halted {
                block: j,
                reason: reason.to_string(),
            };
            break;
        }
        start = end;
    }

    Ok(InductionReport {
        sigma,
        n1: config.n1,
        case_head,
        case_tail,
        ratio_c: f.ratio_c(),
        rows,
        ratio_violations,
        schedule: BlockSchedule {
            sigma,
            scale: (config.scale_num, config.scale_den),
            blocks,
        },
        outcome,
    })
}
