//! Simultaneous inhomogeneous approximation: find t > T with
//! ‖t·ω_n − β_n‖ < δ for every n, where ‖·‖ is the distance to the nearest
//! integer.
//!
//! All distances are in phase units (ℝ/ℤ). A phase distance d corresponds to
//! |e^{−2πi tω} − e^{−2πi β}| ≤ 2π·d, see [`PHASE_LIPSCHITZ`].

mod lattice;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alpha::AlphaParam;
use crate::hp::HpContext;
use crate::ideals::MultiplicativeBasis;

/// Lipschitz constant of x ↦ e^{−2πix} on ℝ/ℤ.
pub const PHASE_LIPSCHITZ: f64 = TAU;

const GRID_CHUNK: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KroneckerError {
    #[error("no t found within budget (best max_error {best_error:.3e} at t = {best_t})")]
    BudgetExhausted { best_error: f64, best_t: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerProblem {
    pub frequencies: Vec<f64>,
    pub targets: Vec<f64>,
    pub delta: f64,
    pub t_min: f64,
}

impl KroneckerProblem {
    pub fn new(frequencies: Vec<f64>, targets: Vec<f64>, delta: f64, t_min: f64) -> Result<Self, KroneckerError> {
        let p = KroneckerProblem { frequencies, targets, delta, t_min };
        p.validate()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    fn validate(&self) -> Result<(), KroneckerError> {
        let bad = |m: String| Err(KroneckerError::DegenerateInput(m));
        if self.frequencies.is_empty() {
            return bad("no frequencies".into());
        }
        if self.frequencies.len() != self.targets.len() {
            return bad(format!(
                "{} frequencies but {} targets",
                self.frequencies.len(),
                self.targets.len()
            ));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad(format!("delta = {} must lie in (0, 1/2)", self.delta));
        }
        if !self.t_min.is_finite() {
            return bad("t_min must be finite".into());
        }
        if self.frequencies.iter().chain(&self.targets).any(|v| !v.is_finite()) {
            return bad("non-finite frequency or target".into());
        }
        if self.frequencies.iter().all(|w| *w == 0.0) {
            return bad("all frequencies are zero".into());
        }
        for i in 0..self.frequencies.len() {
            for j in 0..i {
                if self.frequencies[i] == self.frequencies[j] {
                    return bad(format!("frequency {} repeated", self.frequencies[i]));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSolution {
    pub t: f64,
    pub integer_parts: Vec<i64>,
    pub max_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Grid,
    Lattice,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(Strategy::Grid),
            "lattice" => Ok(Strategy::Lattice),
            _ => Err(format!("unknown strategy `{s}` (grid|lattice)")),
        }
    }
}

/// Work cap for [`solve`]. For the grid strategy `max_iterations` counts grid
/// points; for the lattice strategy it counts reduction rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_t: f64,
    pub max_iterations: u64,
    pub strategy: Strategy,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_t: 1e12,
            max_iterations: 50_000_000,
            strategy: Strategy::Grid,
        }
    }
}

/// Signed residual tω − β − x and x = nearest integer to tω − β.
///
/// The product tω is split exactly into p + e with an FMA, so the fractional
/// part is accurate even when tω is large.
fn residual(t: f64, w: f64, beta: f64) -> (f64, i64) {
    let p = t * w;
    let e = t.mul_add(w, -p);
    let ip = p.floor();
    let frac = (p - ip) + e - beta;
    let k = frac.round();
    (frac - k, (ip + k) as i64)
}

/// max over n of the circle distance of t·ω_n − β_n to ℤ.
pub fn verify(problem: &KroneckerProblem, t: f64) -> f64 {
    problem
        .frequencies
        .iter()
        .zip(&problem.targets)
        .map(|(&w, &b)| residual(t, w, b).0.abs())
        .fold(0.0, f64::max)
}

fn solution_at(problem: &KroneckerProblem, t: f64) -> KroneckerSolution {
    let mut xs = Vec::with_capacity(problem.len());
    let mut err = 0.0f64;
    for (&w, &b) in problem.frequencies.iter().zip(&problem.targets) {
        let (r, x) = residual(t, w, b);
        err = err.max(r.abs());
        xs.push(x);
    }
    KroneckerSolution {
        t,
        integer_parts: xs,
        max_error: err,
    }
}

/// Minimizes max_n |ω_n t − β_n − x_n| over t near `t0` with the x_n fixed.
///
/// The objective is convex and piecewise linear in t, so its minimum sits
/// at one of the breakpoints checked here.
fn refine(problem: &KroneckerProblem, t0: f64) -> f64 {
    let r: Vec<f64> = problem
        .frequencies
        .iter()
        .zip(&problem.targets)
        .map(|(&w, &b)| residual(t0, w, b).0)
        .collect();
    let w = &problem.frequencies;
    let objective = |u: f64| {
        r.iter()
            .zip(w)
            .map(|(ri, wi)| (ri + wi * u).abs())
            .fold(0.0, f64::max)
    };
    let mut cand = vec![0.0];
    for i in 0..r.len() {
        if w[i] != 0.0 {
            cand.push(-r[i] / w[i]);
        }
        for j in 0..i {
            let dm = w[i] - w[j];
            if dm != 0.0 {
                cand.push(-(r[i] - r[j]) / dm);
            }
            let dp = w[i] + w[j];
            if dp != 0.0 {
                cand.push(-(r[i] + r[j]) / dp);
            }
        }
    }
    let mut best = (objective(0.0), 0.0);
    for u in cand {
        let t = t0 + u;
        if !(t > problem.t_min) {
            continue;
        }
        let v = objective(u);
        if v < best.0 {
            best = (v, u);
        }
    }
    let t = t0 + best.1;
    if verify(problem, t) <= verify(problem, t0) {
        t
    } else {
        t0
    }
}

fn finish(problem: &KroneckerProblem, hit: f64) -> Option<KroneckerSolution> {
    let t = refine(problem, hit);
    let sol = solution_at(problem, t);
    (sol.t > problem.t_min && sol.max_error < problem.delta).then_some(sol)
}

fn grid_scan(problem: &KroneckerProblem, budget: &SearchBudget) -> Result<KroneckerSolution, KroneckerError> {
    let wmax = problem.frequencies.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let step = problem.delta / (TAU * wmax);
    let span = ((budget.max_t - problem.t_min) / step).floor();
    let total = if span.is_finite() && span > 0.0 {
        (span as u64).min(budget.max_iterations)
    } else {
        0
    };
    let chunks = total.div_ceil(GRID_CHUNK);
    let batch = (rayon::current_num_threads() as u64 * 4).max(1);
    let mut best = (f64::INFINITY, f64::NAN);

    let mut first = 0;
    while first < chunks {
        let last = (first + batch).min(chunks);
        let results: Vec<(Option<f64>, f64, f64)> = (first..last)
            .into_par_iter()
            .map(|c| {
                let lo = c * GRID_CHUNK;
                let hi = ((c + 1) * GRID_CHUNK).min(total);
                let mut best = (f64::INFINITY, f64::NAN);
                for k in lo..hi {
                    let t = problem.t_min + (k + 1) as f64 * step;
                    let e = verify(problem, t);
                    if e < best.0 {
                        best = (e, t);
                    }
                    if e < problem.delta {
                        return (Some(t), best.0, best.1);
                    }
                }
                (None, best.0, best.1)
            })
            .collect();
        for (_, e, t) in &results {
            if *e < best.0 {
                best = (*e, *t);
            }
        }
        // chunks are in increasing t, so the first hit is the smallest
        for (hit, _, _) in &results {
            if let Some(t) = hit {
                if let Some(sol) = finish(problem, *t) {
                    return Ok(sol);
                }
            }
        }
        first = last;
    }
    Err(KroneckerError::BudgetExhausted {
        best_error: best.0,
        best_t: best.1,
    })
}

fn lattice_search(problem: &KroneckerProblem, budget: &SearchBudget) -> Result<KroneckerSolution, KroneckerError> {
    let n = problem.len();
    let wmax = problem.frequencies.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let h = problem.delta / (TAU * wmax);
    let start = (problem.t_min / h).floor() + 1.0;
    // expected number of steps before all phases line up
    let window = (1.0 / (2.0 * problem.delta)).powi(n as i32);
    let mut best = (f64::INFINITY, f64::NAN);

    for round in 0..budget.max_iterations {
        let q = window * 2f64.powi(round as i32) / problem.delta;
        let center = start + (q * problem.delta).ceil();
        if center * h > budget.max_t {
            break;
        }
        // lattice vectors m'·b₀ + Σ k_i e_i ↔ t = (center + m')·h
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut b0: Vec<f64> = problem.frequencies.iter().map(|w| w * h).collect();
        b0.push(1.0 / q);
        basis.push(b0);
        for i in 0..n {
            let mut e = vec![0.0; n + 1];
            e[i] = 1.0;
            basis.push(e);
        }
        lattice::lll(&mut basis);

        let mut target: Vec<f64> = problem
            .frequencies
            .iter()
            .zip(&problem.targets)
            .map(|(&w, &b)| -residual(center * h, w, b).0)
            .collect();
        target.push(0.0);
        let v = lattice::babai(&basis, &target);

        let mut cands = vec![v.clone()];
        for i in 0..basis.len() {
            for s in [-1.0, 1.0] {
                let vi: Vec<f64> = v.iter().zip(&basis[i]).map(|(a, b)| a + s * b).collect();
                for j in 0..i {
                    for s2 in [-1.0, 1.0] {
                        cands.push(vi.iter().zip(&basis[j]).map(|(a, b)| a + s2 * b).collect());
                    }
                }
                cands.push(vi);
            }
        }
        for c in cands {
            let m = (c[n] * q).round();
            let t = (center + m) * h;
            if !(t > problem.t_min && t <= budget.max_t) {
                continue;
            }
            let e = verify(problem, t);
            if e < best.0 {
                best = (e, t);
            }
            if e < problem.delta {
                if let Some(sol) = finish(problem, t) {
                    return Ok(sol);
                }
            }
        }
    }
    Err(KroneckerError::BudgetExhausted {
        best_error: best.0,
        best_t: best.1,
    })
}

/// Finds t > t_min with all phase residuals below δ.
///
/// The returned solution is re-verified by direct arithmetic; failure to
/// find one says nothing about the independence of the frequencies.
pub fn solve(problem: &KroneckerProblem, budget: &SearchBudget) -> Result<KroneckerSolution, KroneckerError> {
    problem.validate()?;
    let sol = match budget.strategy {
        Strategy::Grid => grid_scan(problem, budget)?,
        Strategy::Lattice => lattice_search(problem, budget)?,
    };
    let replay = verify(problem, sol.t);
    debug_assert!(replay < problem.delta);
    if replay < problem.delta && sol.t > problem.t_min {
        Ok(sol)
    } else {
        Err(KroneckerError::BudgetExhausted {
            best_error: replay,
            best_t: sol.t,
        })
    }
}

/// Result of [`solve_character_targets`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterSolution {
    pub solution: KroneckerSolution,
    /// max over the represented elements of |(n+α)^{−it} − χ(n+α)|.
    pub max_deviation: f64,
}

/// Finds t > t_min with |(n+α)^{−it} − χ(n+α)| < ε for every element n+α
/// represented by `basis`, where χ is the character taking the value
/// `chi_on_basis[j]` on the j-th basis element.
///
/// Each basis element is driven to within ε/(M·l) of its target, which by
/// the triangle inequality bounds the deviation on every represented element
/// by ε. The final check evaluates (n+α)^{−it} directly in high precision.
pub fn solve_character_targets(
    alpha: &AlphaParam,
    basis: &MultiplicativeBasis,
    chi_on_basis: &[Complex64],
    epsilon: f64,
    t_min: f64,
    budget: &SearchBudget,
) -> Result<CharacterSolution, KroneckerError> {
    let l = basis.len();
    if chi_on_basis.len() != l {
        return Err(KroneckerError::DegenerateInput(format!(
            "{} character values for a basis of size {l}",
            chi_on_basis.len()
        )));
    }
    if chi_on_basis.iter().any(|c| (c.norm() - 1.0).abs() > 1e-12) {
        return Err(KroneckerError::DegenerateInput("character values must be unimodular".into()));
    }
    if !(epsilon > 0.0) {
        return Err(KroneckerError::DegenerateInput("epsilon must be positive".into()));
    }
    let m = basis.bound().max(1) as f64;
    let delta = (epsilon / (m * l as f64 * TAU)).min(0.49);
    let frequencies: Vec<f64> = basis.log_values().iter().map(|v| v / TAU).collect();
    let targets: Vec<f64> = chi_on_basis
        .iter()
        .map(|c| (-c.arg() / TAU).rem_euclid(1.0))
        .collect();
    let problem = KroneckerProblem::new(frequencies, targets, delta, t_min)?;
    let solution = solve(&problem, budget)?;

    let phases: Vec<f64> = chi_on_basis.iter().map(|c| c.arg()).collect();
    let max_deviation = character_deviation(alpha, basis, &phases, solution.t);
    if max_deviation < epsilon {
        Ok(CharacterSolution { solution, max_deviation })
    } else {
        Err(KroneckerError::BudgetExhausted {
            best_error: max_deviation,
            best_t: solution.t,
        })
    }
}

/// max over represented elements of |(n+α)^{−it} − Π χ_j^{u_j}|, with the
/// phase t·log(n+α) reduced modulo 2π in high precision.
pub fn character_deviation(alpha: &AlphaParam, basis: &MultiplicativeBasis, phases: &[f64], t: f64) -> f64 {
    let _ = alpha;
    let mut ctx = HpContext::with_digits(40);
    let two_pi = {
        let pi = ctx.parse("3.14159265358979323846264338327950288419716939937510582097494");
        ctx.mul(&pi, &ctx.from_f64(2.0))
    };
    let tb = ctx.from_f64(t);
    let mut worst = 0.0f64;
    for (member, u) in basis.members().iter().zip(basis.exponents()) {
        let v = basis.member_hp(&mut ctx, member);
        let lv = ctx.ln(&v);
        let ph = ctx.mul(&tb, &lv);
        let k = ctx.div(&ph, &two_pi).floor();
        let red = ctx.sub(&ph, &ctx.mul(&k, &two_pi));
        let angle = ctx.to_f64(&red);
        let actual = Complex64::from_polar(1.0, -angle);
        let want: f64 = u.iter().zip(phases).map(|(e, p)| *e as f64 * p).sum();
        let expected = Complex64::from_polar(1.0, want.rem_euclid(TAU));
        worst = worst.max((actual - expected).norm());
    }
    worst
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn solutions_reverify(
            w in prop::collection::vec(0.05..3.0f64, 1..4),
            b in prop::collection::vec(0.0..1.0f64, 3),
        ) {
            let mut w = w;
            w.sort_by(f64::total_cmp);
            w.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
            let targets = b[..w.len()].to_vec();
            let p = KroneckerProblem::new(w, targets, 0.05, 0.0).unwrap();
            if let Ok(sol) = solve(&p, &SearchBudget::default()) {
                prop_assert!(sol.t > p.t_min);
                prop_assert!(verify(&p, sol.t) < p.delta);
                prop_assert!((verify(&p, sol.t) - sol.max_error).abs() < 1e-12);
            }
        }
    }
}
