//! Zeros of L(s, f, α) to the right of σ = 1: argument-principle counting,
//! Newton refinement and Rouché certificates against a twisted series.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alpha::AlphaParam;
use crate::eval::{self, ComplexPoint, EvalError, PeriodicFunction};
use crate::kronecker::{self, KroneckerError, KroneckerProblem, SearchBudget};
use crate::twist::{self, TwistError, TwistedSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroError {
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("function nearly vanishes on the contour at {at} (|value| = {modulus:e})")]
    ZeroOnBoundary { at: Complex64, modulus: f64 },
    #[error("argument tracking did not settle (last winding {raw})")]
    QuadratureStalled { raw: f64 },
    #[error("Newton iterate {at} left the half-plane sigma > 1")]
    LeftHalfPlane { at: Complex64 },
    #[error("Newton did not converge in {iterations} steps (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("the comparison function is too small on the circle (min {eps_min:e}, slack {slack:e})")]
    FVanishesOnCircle { eps_min: f64, slack: f64 },
    #[error("no Rouché margin: {}", .0.margin)]
    NegativeMargin(Box<RoucheCertificate>),
    #[error("winding numbers disagree despite a positive margin ({f_count} vs {l_count})")]
    CrossCheckFailed { f_count: i64, l_count: i64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Rectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Self, ZeroError> {
        if !(sigma_min > 1.0 && sigma_min < sigma_max && t_min < t_max) || !t_max.is_finite() || !sigma_max.is_finite() {
            return Err(ZeroError::InvalidContour(format!(
                "need 1 < {sigma_min} < {sigma_max} and {t_min} < {t_max}"
            )));
        }
        Ok(Rectangle {
            sigma_min,
            sigma_max,
            t_min,
            t_max,
        })
    }

    pub fn conjugate(&self) -> Self {
        Rectangle {
            t_min: -self.t_max,
            t_max: -self.t_min,
            ..*self
        }
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re > self.sigma_min && s.re < self.sigma_max && s.im > self.t_min && s.im < self.t_max
    }
}

/// A positively oriented closed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Contour {
    Rect(Rectangle),
    Circle { center: Complex64, radius: f64 },
}

impl Contour {
    /// γ(u) for u ∈ [0, 1].
    fn point(&self, u: f64) -> Complex64 {
        match self {
            Contour::Circle { center, radius } => center + Complex64::from_polar(*radius, TAU * u),
            Contour::Rect(r) => {
                let w = r.sigma_max - r.sigma_min;
                let h = r.t_max - r.t_min;
                let d = (u.rem_euclid(1.0)) * 2.0 * (w + h);
                if d < w {
                    Complex64::new(r.sigma_min + d, r.t_min)
                } else if d < w + h {
                    Complex64::new(r.sigma_max, r.t_min + (d - w))
                } else if d < 2.0 * w + h {
                    Complex64::new(r.sigma_max - (d - w - h), r.t_max)
                } else {
                    Complex64::new(r.sigma_min, r.t_max - (d - 2.0 * w - h))
                }
            }
        }
    }

    /// Parameter values of the corners, which every initial partition keeps.
    fn corners(&self) -> Vec<f64> {
        match self {
            Contour::Circle { .. } => vec![0.0, 1.0],
            Contour::Rect(r) => {
                let w = r.sigma_max - r.sigma_min;
                let h = r.t_max - r.t_min;
                let p = 2.0 * (w + h);
                vec![0.0, w / p, (w + h) / p, (2.0 * w + h) / p, 1.0]
            }
        }
    }

    fn validate(&self) -> Result<(), ZeroError> {
        match self {
            Contour::Rect(r) => Rectangle::new(r.sigma_min, r.sigma_max, r.t_min, r.t_max).map(|_| ()),
            Contour::Circle { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite() && center.re.is_finite() && center.im.is_finite()) {
                    Err(ZeroError::InvalidContour(format!("circle radius {radius}")))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Initial number of contour pieces.
    pub initial: usize,
    /// Maximum bisection depth of one piece.
    pub max_depth: u32,
    /// |value| at or below which the contour is considered to hit a zero.
    pub min_modulus: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            initial: 256,
            max_depth: 30,
            min_modulus: 1e-10,
        }
    }
}

/// Largest admitted argument increment between neighboring samples.
const MAX_ARG_STEP: f64 = PI / 3.0;

fn check_value(at: Complex64, w: Complex64, min_modulus: f64) -> Result<Complex64, ZeroError> {
    let m = w.norm();
    if !m.is_finite() || m <= min_modulus {
        return Err(ZeroError::ZeroOnBoundary { at, modulus: m });
    }
    Ok(w)
}

/// Argument change of g along γ on [u0, u1], refined until every step
/// turns by less than π/3 and agrees with its two halves.
fn track<E>(g: &E, c: &Contour, u0: f64, w0: Complex64, u1: f64, w1: Complex64, depth: u32, q: &Quadrature) -> Result<f64, ZeroError>
where
    E: Fn(Complex64) -> Result<Complex64, ZeroError> + Sync,
{
    let um = 0.5 * (u0 + u1);
    let sm = c.point(um);
    let wm = check_value(sm, g(sm)?, q.min_modulus)?;
    let whole = (w1 / w0).arg();
    let left = (wm / w0).arg();
    let right = (w1 / wm).arg();
    let settled = whole.abs() < MAX_ARG_STEP && left.abs() < MAX_ARG_STEP && right.abs() < MAX_ARG_STEP && (left + right - whole).abs() < 1e-6;
    if settled {
        return Ok(left + right);
    }
    if depth >= q.max_depth {
        return Err(ZeroError::QuadratureStalled { raw: f64::NAN });
    }
    Ok(track(g, c, u0, w0, um, wm, depth + 1, q)? + track(g, c, um, wm, u1, w1, depth + 1, q)?)
}

fn winding<E>(g: &E, c: &Contour, pieces: usize, q: &Quadrature) -> Result<f64, ZeroError>
where
    E: Fn(Complex64) -> Result<Complex64, ZeroError> + Sync,
{
    let corners = c.corners();
    let per = pieces.div_ceil(corners.len() - 1).max(1);
    let mut us: Vec<f64> = Vec::with_capacity(per * (corners.len() - 1) + 1);
    for k in 0..corners.len() - 1 {
        let (a, b) = (corners[k], corners[k + 1]);
        for i in 0..per {
            us.push(a + (b - a) * i as f64 / per as f64);
        }
    }
    us.push(1.0);
    let values: Vec<Complex64> = us
        .par_iter()
        .map(|&u| {
            let s = c.point(u);
            check_value(s, g(s)?, q.min_modulus)
        })
        .collect::<Result<_, _>>()?;
    let total: f64 = (0..us.len() - 1)
        .into_par_iter()
        .map(|i| track(g, c, us[i], values[i], us[i + 1], values[i + 1], 0, q))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .sum();
    Ok(total / TAU)
}

/// Number of zeros of g inside the contour, counted with multiplicity.
///
/// The winding number is accepted once it lies within 0.25 of an integer and
/// a run with twice as many initial pieces gives the same integer.
pub fn argument_count<E>(g: &E, contour: &Contour, q: &Quadrature) -> Result<i64, ZeroError>
where
    E: Fn(Complex64) -> Result<Complex64, ZeroError> + Sync,
{
    contour.validate()?;
    let mut pieces = q.initial.max(8);
    let mut previous: Option<i64> = None;
    let mut last_raw = f64::NAN;
    for _ in 0..6 {
        let raw = winding(g, contour, pieces, q)?;
        last_raw = raw;
        let k = raw.round();
        if (raw - k).abs() < 0.25 {
            if previous == Some(k as i64) {
                return Ok(k as i64);
            }
            previous = Some(k as i64);
        } else {
            previous = None;
        }
        pieces *= 2;
    }
    Err(ZeroError::QuadratureStalled { raw: last_raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMethod {
    ArgumentNewton,
    RouchePipeline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub s: ComplexPoint,
    pub residual: f64,
    pub method: ZeroMethod,
    pub certificate: Option<RoucheCertificate>,
}

/// Step of the central-difference derivative.
pub const NEWTON_STEP: f64 = 1e-6;
pub const NEWTON_MAX_ITER: usize = 50;

/// Newton's method with a central-difference derivative, kept in σ > 1.
pub fn newton_refine<E>(g: &E, s0: ComplexPoint, tol: f64) -> Result<ZeroRecord, ZeroError>
where
    E: Fn(Complex64) -> Result<Complex64, ZeroError>,
{
    let mut s = s0.to_complex();
    let h = Complex64::new(NEWTON_STEP, 0.0);
    let mut residual = f64::INFINITY;
    for _ in 0..=NEWTON_MAX_ITER {
        if !(s.re - NEWTON_STEP > 1.0) {
            return Err(ZeroError::LeftHalfPlane { at: s });
        }
        let v = g(s)?;
        residual = v.norm();
        if residual <= tol {
            return Ok(ZeroRecord {
                s: s.into(),
                residual,
                method: ZeroMethod::ArgumentNewton,
                certificate: None,
            });
        }
        let d = (g(s + h)? - g(s - h)?) / (h * 2.0);
        if !(d.norm() > 0.0 && d.norm().is_finite()) {
            break;
        }
        s -= v / d;
    }
    Err(ZeroError::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoucheCertificate {
    pub sigma0: f64,
    pub delta1: f64,
    pub t: f64,
    /// min |F| over the sampled circle.
    pub eps_min: f64,
    /// max |L(s+it) − F(s)| over the sampled circle.
    pub sup_diff: f64,
    /// Bound on how much both quantities can move between samples.
    pub slack: f64,
    pub samples: usize,
    /// eps_min − sup_diff − slack.
    pub margin: f64,
    /// Winding numbers of F and of s ↦ L(s+it) on the circle, when computed.
    pub f_count: Option<i64>,
    pub l_count: Option<i64>,
}

impl RoucheCertificate {
    pub fn is_valid(&self) -> bool {
        self.margin > 0.0
    }
}

/// Rouché comparison of `g` against `f` on the circle |s − center| = radius.
///
/// `deriv_f` and `deriv_diff` bound |f'| and |g' − f'| on the circle; between
/// neighbors at arc distance h each quantity moves by at most bound·h/2.
#[allow(clippy::too_many_arguments)]
pub fn rouche_certify<F, G>(
    f: &F,
    g: &G,
    center: Complex64,
    radius: f64,
    samples: usize,
    deriv_f: f64,
    deriv_diff: f64,
    q: &Quadrature,
) -> Result<RoucheCertificate, ZeroError>
where
    F: Fn(Complex64) -> Result<Complex64, ZeroError> + Sync,
    G: Fn(Complex64) -> Result<Complex64, ZeroError> + Sync,
{
    let samples = samples.max(8);
    let pts: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = center + Complex64::from_polar(radius, TAU * k as f64 / samples as f64);
            let fv = f(s)?;
            let gv = g(s)?;
            Ok((fv.norm(), (gv - fv).norm()))
        })
        .collect::<Result<_, ZeroError>>()?;
    let eps_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let sup_diff = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let half_arc = 0.5 * TAU * radius / samples as f64;
    let slack = half_arc * (deriv_f + deriv_diff);
    if !(eps_min > half_arc * deriv_f) {
        return Err(ZeroError::FVanishesOnCircle {
            eps_min,
            slack: half_arc * deriv_f,
        });
    }
    let margin = eps_min - sup_diff - slack;
    let mut cert = RoucheCertificate {
        sigma0: center.re,
        delta1: radius,
        t: center.im,
        eps_min,
        sup_diff,
        slack,
        samples,
        margin,
        f_count: None,
        l_count: None,
    };
    if margin > 0.0 {
        let circle = Contour::Circle { center, radius };
        let fc = argument_count(f, &circle, q)?;
        let gc = argument_count(g, &circle, q)?;
        cert.f_count = Some(fc);
        cert.l_count = Some(gc);
        if fc != gc {
            return Err(ZeroError::CrossCheckFailed { f_count: fc, l_count: gc });
        }
    }
    Ok(cert)
}

/// Σ |f(n)| ln(n+α) (n+α)^{−σ}, bounded above by a backward secant of the
/// convex function σ ↦ Σ |f(n)| (n+α)^{−σ}.
pub fn derivative_bound(f: &PeriodicFunction, a: f64, sigma: f64) -> Result<f64, EvalError> {
    let abs = f.abs();
    let h = 0.1 * (sigma - 1.0);
    let tol = 1e-12 / (sigma - 1.0 - h);
    let lo = eval::lfunction_at(Complex64::new(sigma - h, 0.0), &abs, a, tol)?.re;
    let hi = eval::lfunction_at(Complex64::new(sigma, 0.0), &abs, a, tol)?.re;
    Ok((lo - hi) / h + 2.0 * tol / h)
}

/// Rouché check of s ↦ L(s+it, f, α) against the series F on the circle of
/// radius δ₁ around σ₀.
#[allow(clippy::too_many_arguments)]
pub fn rouche_check(
    f: &PeriodicFunction,
    alpha: &AlphaParam,
    series: &TwistedSeries,
    sigma0: f64,
    delta1: f64,
    t: f64,
    samples: usize,
    tol: f64,
) -> Result<RoucheCertificate, ZeroError> {
    if !(delta1 > 0.0 && 1.0 + delta1 < sigma0) {
        return Err(ZeroError::InvalidContour(format!(
            "circle of radius {delta1} around {sigma0} reaches sigma <= 1"
        )));
    }
    let a = alpha.value();
    let fe = |s: Complex64| -> Result<Complex64, ZeroError> {
        series.eval(s, tol).map_err(|e| match e {
            TwistError::Eval(e) => ZeroError::Eval(e),
            other => ZeroError::InvalidContour(other.to_string()),
        })
    };
    let shift = Complex64::new(0.0, t);
    // rounding in the phases t·ln(n+α) grows with t
    let l_tol = tol.max(1e-12 * (1.0 + t.abs()));
    let le = |s: Complex64| -> Result<Complex64, ZeroError> { Ok(eval::lfunction_at(s + shift, f, a, l_tol)?) };
    // Both F and the shifted L are Dirichlet series with coefficients of modulus |f(n)|.
    let d = derivative_bound(&series.f, a, sigma0 - delta1)?.max(derivative_bound(f, a, sigma0 - delta1)?);
    let cert = rouche_certify(
        &fe,
        &le,
        Complex64::new(sigma0, 0.0),
        delta1,
        samples,
        d,
        2.0 * d,
        &Quadrature::default(),
    )?;
    // the circle is centered on the real axis; record the shift
    let cert = RoucheCertificate { t, ..cert };
    if cert.is_valid() {
        Ok(cert)
    } else {
        Err(ZeroError::NegativeMargin(Box::new(cert)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineBudget {
    /// Number of leading terms whose phases Kronecker controls (≤ 6 keeps it fast).
    pub terms: usize,
    pub kronecker: SearchBudget,
    /// Number of successive Kronecker solutions tried before giving up.
    pub attempts: usize,
    pub samples: usize,
    /// δ₁ = fraction·(σ₀ − 1).
    pub radius_fraction: f64,
    /// Kronecker solutions are sought with t above this.
    pub t_min: f64,
    /// Floor on the phase tolerance handed to Kronecker.
    pub min_phase_tolerance: f64,
    pub tol: f64,
}

impl Default for PipelineBudget {
    fn default() -> Self {
        PipelineBudget {
            terms: 4,
            kronecker: SearchBudget {
                max_t: 1e7,
                max_iterations: 50_000_000,
                ..SearchBudget::default()
            },
            attempts: 10,
            samples: 720,
            radius_fraction: 0.5,
            t_min: 1.0,
            min_phase_tolerance: 0.1,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Residue,
    Truncation,
    SigmaZero,
    Circle,
    Kronecker,
    Rouche,
    Newton,
}

/// Why the pipeline stopped, with the numbers gathered so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[error("pipeline stopped at {stage:?}: {reason}")]
pub struct PipelineFailure {
    pub stage: Stage,
    pub reason: String,
    pub m: Option<u128>,
    pub sigma0: Option<f64>,
    pub delta1: Option<f64>,
    pub phase_tolerance: Option<f64>,
    pub tail_bound: Option<f64>,
    /// Best (smallest) margin seen over the attempted shifts.
    pub best_margin: Option<f64>,
    pub attempts: usize,
}

impl PipelineFailure {
    fn at(stage: Stage, reason: impl Into<String>) -> Self {
        PipelineFailure {
            stage,
            reason: reason.into(),
            m: None,
            sigma0: None,
            delta1: None,
            phase_tolerance: None,
            tail_bound: None,
            best_margin: None,
            attempts: 0,
        }
    }
}

/// Sign-flip series → σ₀ → circle → Kronecker shift t → Rouché → Newton.
///
/// The Kronecker step aligns (n+α)^{−it} with the sign pattern for n below
/// `budget.terms`; the remaining terms are not controlled, so success depends
/// on how small they happen to be. The circle check evaluates L exactly, so
/// an uncontrolled tail can only cause failure, never a false certificate.
pub fn find_zero_pipeline(
    f: &PeriodicFunction,
    alpha: &AlphaParam,
    delta: f64,
    budget: &PipelineBudget,
) -> Result<ZeroRecord, PipelineFailure> {
    if eval::residue(f) == 0.0 {
        return Err(PipelineFailure::at(Stage::Residue, "residue of f is zero"));
    }
    let m = twist::truncation_index(f, alpha, delta).map_err(|e| PipelineFailure::at(Stage::Truncation, e.to_string()))?;
    let fail = |stage: Stage, reason: String| PipelineFailure {
        m: Some(m),
        ..PipelineFailure::at(stage, reason)
    };
    let series = TwistedSeries::sign_flip(f.clone(), alpha.clone(), m);
    let sigma0 = twist::find_sigma0(&series, delta, 1e-12).map_err(|e| fail(Stage::SigmaZero, e.to_string()))?;
    let fail = |stage: Stage, reason: String| PipelineFailure {
        sigma0: Some(sigma0),
        ..fail(stage, reason)
    };
    let delta1 = budget.radius_fraction.clamp(1e-6, 0.999) * (sigma0 - 1.0);
    let a = alpha.value();
    let sigma_min = sigma0 - delta1;

    // F on the circle: its minimum fixes the admissible error ε
    let fe = |s: Complex64| -> Result<Complex64, ZeroError> {
        series.eval(s, budget.tol).map_err(|e| ZeroError::InvalidContour(e.to_string()))
    };
    let eps = (0..budget.samples.max(8))
        .into_par_iter()
        .map(|k| {
            let s = Complex64::new(sigma0, 0.0) + Complex64::from_polar(delta1, TAU * k as f64 / budget.samples.max(8) as f64);
            fe(s).map(|v| v.norm())
        })
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| fail(Stage::Circle, e.to_string()))?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(eps > 0.0) {
        return Err(fail(Stage::Circle, format!("F vanishes on the circle (min {eps:e})")));
    }

    // phases: (n+α)^{−it} = +1 for n ≤ m and −1 after
    let n_terms = budget.terms.max(1);
    let weights: f64 = (0..n_terms as u64).map(|n| f.at(n).abs() * (n as f64 + a).powf(-sigma_min)).sum();
    let abs = f.abs();
    let tail_bound = 2.0
        * eval::tail_after(Complex64::new(sigma_min, 0.0), &abs, a, n_terms as u128 - 1, 1e-10)
            .map(|v| v.re)
            .unwrap_or(f64::INFINITY);
    let phase_tol = (eps / (4.0 * PI * weights)).clamp(budget.min_phase_tolerance, 0.45);
    let fail = |stage: Stage, reason: String| PipelineFailure {
        delta1: Some(delta1),
        phase_tolerance: Some(phase_tol),
        tail_bound: Some(tail_bound),
        ..fail(stage, reason)
    };
    let freqs: Vec<f64> = (0..n_terms as u64).map(|n| (n as f64 + a).ln() / TAU).collect();
    let targets: Vec<f64> = (0..n_terms as u128).map(|n| if n <= m { 0.0 } else { 0.5 }).collect();

    let mut t_min = budget.t_min;
    let mut best_margin = f64::NEG_INFINITY;
    let mut attempts = 0;
    let mut last_reason = String::from("no attempt made");
    while attempts < budget.attempts.max(1) {
        attempts += 1;
        let problem = KroneckerProblem::new(freqs.clone(), targets.clone(), phase_tol, t_min)
            .map_err(|e| fail(Stage::Kronecker, e.to_string()))?;
        let sol = match kronecker::solve(&problem, &budget.kronecker) {
            Ok(s) => s,
            Err(e @ KroneckerError::BudgetExhausted { .. }) | Err(e @ KroneckerError::DegenerateInput(_)) => {
                let mut out = fail(Stage::Kronecker, e.to_string());
                out.attempts = attempts;
                out.best_margin = best_margin.is_finite().then_some(best_margin);
                return Err(out);
            }
        };
        let t = sol.t;
        t_min = t + 1.0;
        match rouche_check(f, alpha, &series, sigma0, delta1, t, budget.samples, budget.tol) {
            Ok(cert) => {
                let shift = Complex64::new(0.0, t);
                let tol = budget.tol.max(1e-12 * (1.0 + t.abs()));
                let le = |s: Complex64| -> Result<Complex64, ZeroError> { Ok(eval::lfunction_at(s, f, a, tol / 10.0)?) };
                let newton = newton_refine(&le, (Complex64::new(sigma0, 0.0) + shift).into(), tol);
                return match newton {
                    Ok(rec) if (rec.s.to_complex() - shift - sigma0).norm() < delta1 && rec.s.sigma > 1.0 => Ok(ZeroRecord {
                        method: ZeroMethod::RouchePipeline,
                        certificate: Some(cert),
                        ..rec
                    }),
                    Ok(rec) => Err(PipelineFailure {
                        attempts,
                        best_margin: Some(cert.margin),
                        ..fail(Stage::Newton, format!("Newton converged outside the certified disk at {:?}", rec.s))
                    }),
                    Err(e) => Err(PipelineFailure {
                        attempts,
                        best_margin: Some(cert.margin),
                        ..fail(Stage::Newton, e.to_string())
                    }),
                };
            }
            Err(ZeroError::NegativeMargin(cert)) => {
                best_margin = best_margin.max(cert.margin);
                last_reason = format!("margin {:e} at t = {t}", cert.margin);
            }
            Err(e) => {
                last_reason = e.to_string();
            }
        }
    }
    Err(PipelineFailure {
        attempts,
        best_margin: best_margin.is_finite().then_some(best_margin),
        ..fail(Stage::Rouche, last_reason)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet_poly(s: Complex64) -> Result<Complex64, ZeroError> {
        Ok(Complex64::new(1.0, 0.0) - Complex64::new(2f64.powf(1.05), 0.0) * Complex64::new(2.0, 0.0).powc(-s))
    }

    #[test]
    fn counts_dirichlet_polynomial_zeros() {
        let r = Rectangle::new(1.01, 1.1, -1.0, 20.0).unwrap();
        assert_eq!(argument_count(&dirichlet_poly, &Contour::Rect(r), &Quadrature::default()).unwrap(), 3);
    }

    #[test]
    fn counts_polynomial_roots() {
        let g = |s: Complex64| Ok((s - Complex64::new(1.2, 5.0)) * (s - Complex64::new(1.3, 7.0)));
        let r = Rectangle::new(1.1, 1.5, 4.0, 8.0).unwrap();
        assert_eq!(argument_count(&g, &Contour::Rect(r), &Quadrature::default()).unwrap(), 2);
        let r = Rectangle::new(1.1, 1.5, 6.0, 8.0).unwrap();
        assert_eq!(argument_count(&g, &Contour::Rect(r), &Quadrature::default()).unwrap(), 1);
        let c = Contour::Circle {
            center: Complex64::new(1.2, 5.0),
            radius: 0.1,
        };
        assert_eq!(argument_count(&g, &c, &Quadrature::default()).unwrap(), 1);
    }

    #[test]
    fn boundary_zero_is_reported() {
        let g = |s: Complex64| Ok(s - Complex64::new(1.5, 0.0));
        let r = Rectangle::new(1.5, 2.0, -1.0, 1.0).unwrap();
        assert!(matches!(
            argument_count(&g, &Contour::Rect(r), &Quadrature::default()),
            Err(ZeroError::ZeroOnBoundary { .. })
        ));
    }

    #[test]
    fn newton_on_closed_form() {
        let rec = newton_refine(&dirichlet_poly, ComplexPoint::new(1.04, 9.0), 1e-12).unwrap();
        assert!((rec.s.sigma - 1.05).abs() < 1e-9);
        assert!((rec.s.t - TAU / 2f64.ln()).abs() < 1e-9);
        let lin = |s: Complex64| Ok(s - Complex64::new(1.2, 5.0));
        let rec = newton_refine(&lin, ComplexPoint::new(1.5, 4.0), 1e-14).unwrap();
        assert!((rec.s.to_complex() - Complex64::new(1.2, 5.0)).norm() < 1e-12);
    }

    #[test]
    fn newton_reports_left_half_plane() {
        let lin = |s: Complex64| Ok(s - Complex64::new(0.5, 0.0));
        assert!(matches!(
            newton_refine(&lin, ComplexPoint::new(1.5, 0.0), 1e-12),
            Err(ZeroError::LeftHalfPlane { .. })
        ));
    }

    #[test]
    fn identity_comparison_certifies() {
        let f = |s: Complex64| Ok(s - Complex64::new(1.5, 0.0));
        let cert = rouche_certify(&f, &f, Complex64::new(1.5, 0.0), 0.2, 720, 1.0, 0.0, &Quadrature::default()).unwrap();
        assert_eq!(cert.sup_diff, 0.0);
        assert!(cert.is_valid());
        assert_eq!(cert.f_count, Some(1));
    }

    #[test]
    fn shifted_l_against_sign_flip() {
        let f = PeriodicFunction::constant(1.0);
        let alpha = AlphaParam::rational(1, 1).unwrap();
        let series = TwistedSeries::sign_flip(f.clone(), alpha.clone(), 0);
        let s0 = twist::find_sigma0(&series, 1.0, 1e-12).unwrap();
        let r = rouche_check(&f, &alpha, &series, s0, 0.5 * (s0 - 1.0), 0.1, 720, 1e-10);
        assert!(matches!(r, Err(ZeroError::NegativeMargin(_))));
    }

    #[test]
    fn residue_zero_stops_early() {
        let f: PeriodicFunction = "1,-1".parse().unwrap();
        let out = find_zero_pipeline(&f, &AlphaParam::rational(1, 3).unwrap(), 0.5, &PipelineBudget::default());
        assert_eq!(out.unwrap_err().stage, Stage::Residue);
    }
}
