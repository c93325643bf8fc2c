//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use hurwitz_lab::annulus::{self, AnnulusSpec};
use hurwitz_lab::eval::{self, ComplexPoint, PeriodicFunction};
use hurwitz_lab::ideals::{factor_shift, FactorTable};
use hurwitz_lab::kronecker::{self, KroneckerProblem, SearchBudget};
use hurwitz_lab::twist::{self, run_schedule, Outcome, ScheduleConfig, SetSource};
use hurwitz_lab::zeros::{self, argument_count, Contour, PipelineBudget, Quadrature, Rectangle};
use hurwitz_lab::{AlphaParam, Complex64, Precision};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// tolerances
const DECOMPOSITION_TOL: f64 = 1e-10;
const DECOMPOSITION_BUDGET: Duration = Duration::from_secs(30);
const HALF_TOL: f64 = 1e-10;
const KRONECKER_DELTA: f64 = 0.05;
const CLOSED_FORM_TOL: f64 = 1e-9;
const ORACLE_SLACK: f64 = 1e-12;
const REALIZE_TOL: f64 = 1e-9;
const Z_RULE_TOL: f64 = 1e-12;
const ARGUMENT_BUDGET: Duration = Duration::from_secs(60);

struct Outcomes(Vec<(u32, bool, String)>);

impl Outcomes {
    fn record(&mut self, id: u32, name: &str, result: Result<String, String>) {
        let (ok, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        println!("criterion {id:>2} {:<28} {} {detail}", name, if ok { "PASS" } else { "FAIL" });
        self.0.push((id, ok, detail));
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_f(r: &mut ChaCha8Rng, max_q: usize, lo: f64, hi: f64) -> PeriodicFunction {
    let q = r.random_range(1..=max_q);
    PeriodicFunction::new((0..q).map(|_| r.random_range(lo..hi)).collect()).unwrap()
}

fn decomposition() -> Result<String, String> {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let f = random_f(&mut r, 8, -2.0, 2.0);
        let alpha = AlphaParam::real(r.random_range(0.5..3.0)).unwrap();
        let s = ComplexPoint::new(r.random_range(1.1..3.0), r.random_range(-50.0..50.0));
        let l = eval::lfunction(s, &f, &alpha, 1e-11).map_err(|e| e.to_string())?;
        let d = eval::decompose_tol(s, &f, &alpha, 1e-11).map_err(|e| e.to_string())?;
        worst = worst.max((l - d).norm());
    }
    let took = start.elapsed();
    let detail = format!("max diff {worst:.2e}, {took:.2?}");
    if worst <= DECOMPOSITION_TOL && took < DECOMPOSITION_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn half_identity() -> Result<String, String> {
    let half = AlphaParam::rational(1, 2).unwrap();
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let s = ComplexPoint::new(1.1 + 0.2 * i as f64, -45.0 + 10.0 * j as f64);
            let lhs = eval::hurwitz_zeta(s, &half, 1e-12).map_err(|e| e.to_string())?;
            let z = eval::hurwitz(s.to_complex(), 1.0, 1e-12).map_err(|e| e.to_string())?;
            let rhs = (Complex64::new(2.0, 0.0).powc(s.to_complex()) - 1.0) * z;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    let detail = format!("100 points, max diff {worst:.2e}");
    if worst <= HALF_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn residue_convergence() -> Result<String, String> {
    let mut r = rng(3);
    let mut worst_ratio = 0.0f64;
    for _ in 0..50 {
        let f = random_f(&mut r, 8, -1.0, 1.0);
        let alpha = AlphaParam::real(r.random_range(0.5..3.0)).unwrap();
        // independent residue: the mean of f over one period
        let mean = f.values().iter().sum::<f64>() / f.period() as f64;
        for k in 2..=6 {
            let eps = 10f64.powi(-k);
            let l = eval::lfunction(ComplexPoint::real(1.0 + eps), &f, &alpha, 1e-6).map_err(|e| e.to_string())?;
            let err = (l.re * eps - mean).abs();
            worst_ratio = worst_ratio.max(err / (10.0 * eps));
        }
    }
    let detail = format!("worst |(s-1)L - r| / (10·10^-k) = {worst_ratio:.3}");
    if worst_ratio <= 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn distance_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn kronecker_soundness() -> Result<String, String> {
    let mut r = rng(4);
    let budget = SearchBudget::default();
    let mut solved = 0;
    let mut exhausted = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..=4);
        let mut w: Vec<f64> = Vec::new();
        while w.len() < n {
            let x: f64 = r.random_range(0.1..3.0);
            if w.iter().all(|y| (x - y).abs() > 1e-2) {
                w.push(x);
            }
        }
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let t_min = r.random_range(0.0..50.0);
        let p = KroneckerProblem::new(w.clone(), b.clone(), KRONECKER_DELTA, t_min).map_err(|e| e.to_string())?;
        match kronecker::solve(&p, &budget) {
            Ok(sol) => {
                let err = w
                    .iter()
                    .zip(&b)
                    .map(|(wi, bi)| distance_to_integer(sol.t * wi - bi))
                    .fold(0.0, f64::max);
                if !(sol.t > t_min && err < KRONECKER_DELTA) {
                    return Err(format!("t = {} re-verifies at {err}", sol.t));
                }
                worst = worst.max(err);
                solved += 1;
            }
            Err(_) => exhausted += 1,
        }
    }
    // one frequency: the first window center past T
    let mut closed = 0.0f64;
    for _ in 0..100 {
        let w: f64 = r.random_range(0.1..5.0);
        let beta: f64 = r.random_range(0.0..1.0);
        let k0 = r.random_range(0..100) as f64;
        let t_min = (beta + k0 + 0.5) / w;
        let p = KroneckerProblem::new(vec![w], vec![beta], KRONECKER_DELTA, t_min).map_err(|e| e.to_string())?;
        let sol = kronecker::solve(&p, &budget).map_err(|e| e.to_string())?;
        closed = closed.max((sol.t - (beta + k0 + 1.0) / w).abs());
    }
    let detail = format!(
        "{solved} solved (max error {worst:.3}), {exhausted} exhausted; single-frequency deviation {closed:.2e}"
    );
    if closed <= CLOSED_FORM_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn annulus_checks() -> Result<String, String> {
    let mut r = rng(5);
    let mut lists = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let n = r.random_range(1..=10);
        let radii: Vec<f64> = (0..n).map(|_| r.random_range(0.01..10.0)).collect();
        let (outer, inner) = annulus::radii(&radii).map_err(|e| e.to_string())?;
        let sum: f64 = radii.iter().sum();
        let max = radii.iter().cloned().fold(0.0, f64::max);
        if (outer - sum).abs() > 1e-12 * sum || (inner - (2.0 * max - sum).max(0.0)).abs() > 1e-12 * sum {
            return Err(format!("formula mismatch on {radii:?}"));
        }
        lists.push((radii, outer, inner));
    }
    for (i, (radii, outer, inner)) in lists.iter().take(100).enumerate() {
        let (lo, hi) = annulus::sample_oracle(radii, 100_000, i as u64);
        if lo < inner - ORACLE_SLACK || hi > outer + ORACLE_SLACK {
            return Err(format!("sample [{lo}, {hi}] escapes [{inner}, {outer}]"));
        }
    }
    let mut worst = 0.0f64;
    for radii in [vec![1.0, 2.0, 2.5, 3.0], vec![1.0, 2.0, 5.0], vec![0.3, 0.3, 0.3, 0.3, 0.3, 0.3]] {
        let spec = AnnulusSpec::new(&radii).map_err(|e| e.to_string())?;
        for i in 0..20 {
            for j in 0..20 {
                let m = spec.inner() + (spec.outer() - spec.inner()) * i as f64 / 19.0;
                let z = Complex64::from_polar(m, TAU * j as f64 / 20.0);
                let got = annulus::realize(&spec, z, 1e-12).map_err(|e| e.to_string())?;
                let sum: Complex64 = got.radii.iter().zip(&got.angles).map(|(r, a)| Complex64::from_polar(*r, *a)).sum();
                worst = worst.max((sum - z).norm());
            }
        }
    }
    let detail = format!("10^4 formula checks, 100 × 10^5 samples, grid max miss {worst:.2e}");
    if worst <= REALIZE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn z_rule_identity() -> Result<String, String> {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let l = Complex64::new(r.random_range(-50.0..50.0), r.random_range(-50.0..50.0));
        let s3 = r.random_range(1e-6..80.0);
        let z = twist::z_rule(l, s3);
        worst = worst.max(((l + z).norm() - (l.norm() - s3).max(0.0)).abs());
    }
    if worst <= Z_RULE_TOL {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e}"))
    }
}

fn greedy_induction() -> Result<String, String> {
    let cfg = ScheduleConfig {
        n1: 1000,
        blocks: 50,
        scale_num: 1,
        scale_den: 100,
        ..ScheduleConfig::default()
    };
    let f = PeriodicFunction::constant(1.0);
    let report = run_schedule(
        &f,
        &AlphaParam::sqrt(2).unwrap(),
        &cfg,
        SetSource::Authentic,
        None,
        Precision::High { digits: 40 },
    )
    .map_err(|e| e.to_string())?;
    if report.outcome != Outcome::Completed || report.rows.len() < 50 {
        return Err(format!("{:?}; last row {:?}", report.outcome, report.rows.last()));
    }
    let mut n = cfg.n1;
    for (row, block) in report.rows.iter().zip(&report.schedule.blocks) {
        let expected_len = (n / 100).max(1);
        let hp = row.hp.as_ref().ok_or("no high-precision check")?;
        let partition: BTreeSet<u64> = block.a_set.iter().chain(&block.b_set).copied().collect();
        let ok = row.start == n
            && row.len == expected_len
            && partition == (n + 1..=n + expected_len).collect()
            && block.a_set.len() + block.b_set.len() == expected_len as usize
            && row.bound_ok
            && row.eqalg_ok
            && row.chain_ok
            && hp.eqalg_ok
            && hp.chain_ok;
        if !ok {
            return Err(format!("block {} ledger: {row:?}", row.j));
        }
        n += expected_len;
    }
    let worst = report.rows.iter().map(|r| r.partial_abs / r.s4).fold(0.0, f64::max);
    Ok(format!(
        "sigma {}, {} blocks, max |P|/S4 = {worst:.4}, {} ratio warnings",
        report.sigma,
        report.rows.len(),
        report.ratio_violations.len()
    ))
}

/// Trial-division prime factors.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn ideal_arithmetic() -> Result<String, String> {
    let alpha = AlphaParam::sqrt(2).unwrap();
    for n in 0..=5000 {
        let fac = factor_shift(n, &alpha).map_err(|e| e.to_string())?;
        let exact = (n as i128 * n as i128 - 2).unsigned_abs();
        if !fac.norm_recombines() || fac.norm != exact {
            return Err(format!("n = {n}: norm {} vs {exact}", fac.norm));
        }
    }

    // For α = √2 the prime of norm p dividing n + √2 divides m + √2 iff
    // m ≡ n (mod p). Collect, for each n and p | n² − 2, the other shifts
    // it divides by checking every pair.
    const L: u64 = 2000;
    let mut conflicts: Vec<Vec<(u64, Option<u64>)>> = Vec::new();
    for n in 0..=L {
        let norm = (n * n).abs_diff(2);
        let mut row = Vec::new();
        for p in prime_factors(norm) {
            // any other shift below n, and the nearest one above
            let below = (0..n).any(|m| (m * m).abs_diff(2) % p == 0 && (n - m) % p == 0);
            let above = (n + 1..=L).find(|&m| (m * m).abs_diff(2) % p == 0 && (m - n) % p == 0);
            row.push((p, if below { Some(0) } else { above }));
        }
        conflicts.push(row);
    }
    let oracle_private = |n: u64, limit: u64| -> BTreeSet<u64> {
        conflicts[n as usize]
            .iter()
            .filter(|(_, c)| match c {
                Some(0) => false,
                Some(m) => *m > limit,
                None => true,
            })
            .map(|(p, _)| *p)
            .collect()
    };

    let mut table = FactorTable::new(&alpha).map_err(|e| e.to_string())?;
    table.extend_to(L).map_err(|e| e.to_string())?;
    let mut checked = 0u64;
    for limit in 1..=L {
        for n in 1..=limit {
            let got: BTreeSet<u64> = table.private_primes_of(n, limit).iter().map(|p| p.p).collect();
            if got != oracle_private(n, limit) {
                return Err(format!("n = {n}, N+M = {limit}: {got:?} vs {:?}", oracle_private(n, limit)));
            }
            checked += 1;
        }
    }
    // the block interface on a grid of (N, M)
    let mut blocks = 0;
    for start in (0..L).step_by(23) {
        for len in (1..=L - start).step_by(17) {
            let block = table.block(start, len).map_err(|e| e.to_string())?;
            let got: Vec<u64> = block.private.iter().map(|p| p.n).collect();
            let want: Vec<u64> = (start + 1..=start + len).filter(|&n| !oracle_private(n, start + len).is_empty()).collect();
            if got != want {
                return Err(format!("block ({start}, {len}) differs"));
            }
            blocks += 1;
        }
    }
    Ok(format!("norms exact for n <= 5000; {checked} (n, N+M) pairs and {blocks} blocks match the oracle"))
}

fn argument_principle() -> Result<String, String> {
    let start = Instant::now();
    let q = Quadrature::default();
    let poly = |s: Complex64| Ok(Complex64::new(1.0, 0.0) - Complex64::new(2f64.powf(1.05), 0.0) * Complex64::new(2.0, 0.0).powc(-s));
    let rect = Rectangle::new(1.01, 1.1, -1.0, 20.0).map_err(|e| e.to_string())?;
    let a = argument_count(&poly, &Contour::Rect(rect), &q).map_err(|e| e.to_string())?;
    let zeta = |s: Complex64| Ok(eval::hurwitz(s, 1.0, 1e-12)?);
    let rect = Rectangle::new(1.1, 2.0, 0.0, 30.0).map_err(|e| e.to_string())?;
    let b = argument_count(&zeta, &Contour::Rect(rect), &q).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let detail = format!("polynomial {a}, zeta {b}, {took:.2?}");
    if a == 3 && b == 0 && took < ARGUMENT_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rouche_cross_validation() -> Result<String, String> {
    let mut r = rng(10);
    let q = Quadrature::default();
    let mut certified = 0;
    for i in 0..50 {
        let c = Complex64::new(r.random_range(1.5..3.0), r.random_range(-20.0..20.0));
        let rho = r.random_range(0.05..0.4);
        // perturbation size kept away from the radius
        let scale = if i % 2 == 0 { r.random_range(0.0..0.8) } else { r.random_range(1.2..2.0) };
        let eta = Complex64::from_polar(scale * rho, r.random_range(0.0..TAU));
        let f = move |s: Complex64| Ok(s - c);
        let g = move |s: Complex64| Ok(s - c + eta);
        let cert = zeros::rouche_certify(&f, &g, c, rho, 720, 1.0, 0.0, &q).map_err(|e| e.to_string())?;
        if (cert.sup_diff - eta.norm()).abs() > 1e-12 {
            return Err(format!("pair {i}: sup_diff {} vs {}", cert.sup_diff, eta.norm()));
        }
        let circle = Contour::Circle { center: c, radius: rho };
        let fc = argument_count(&f, &circle, &q).map_err(|e| e.to_string())?;
        let gc = argument_count(&g, &circle, &q).map_err(|e| e.to_string())?;
        if cert.is_valid() != (fc == gc) {
            return Err(format!("pair {i}: margin {} but counts {fc} / {gc}", cert.margin));
        }
        if cert.is_valid() {
            if gc < 1 {
                return Err(format!("pair {i}: false certificate"));
            }
            certified += 1;
        }
    }
    Ok(format!("50 pairs, {certified} certified, no false positives"))
}

fn pipeline_smoke() -> Result<String, String> {
    let alpha: AlphaParam = "dec:0.7853981634".parse().map_err(|e: hurwitz_lab::AlphaError| e.to_string())?;
    let f = PeriodicFunction::constant(1.0);
    let budget = PipelineBudget::default();
    if budget.terms > 6 {
        return Err(format!("Kronecker uses {} terms", budget.terms));
    }
    match zeros::find_zero_pipeline(&f, &alpha, 0.5, &budget) {
        Ok(rec) => {
            let cert = rec.certificate.as_ref().ok_or("record without certificate")?;
            let tol = budget.tol.max(1e-12 * (1.0 + cert.t.abs()));
            let value = eval::lfunction(rec.s, &f, &alpha, tol / 10.0).map_err(|e| e.to_string())?;
            if cert.margin > 0.0 && rec.residual <= tol && value.norm() <= tol && rec.s.sigma > 1.0 {
                Ok(format!("certified zero at {:?}, margin {:.3e}", rec.s, cert.margin))
            } else {
                Err(format!("record violates its guarantees: {rec:?}"))
            }
        }
        Err(fail) => Ok(format!(
            "structured failure at {:?}: {} (best margin {:?})",
            fail.stage, fail.reason, fail.best_margin
        )),
    }
}

fn main() {
    let mut out = Outcomes(Vec::new());
    out.record(1, "decomposition identity", decomposition());
    out.record(2, "half identity", half_identity());
    out.record(3, "residue convergence", residue_convergence());
    out.record(4, "kronecker soundness", kronecker_soundness());
    out.record(5, "annulus", annulus_checks());
    out.record(6, "z-rule identity", z_rule_identity());
    out.record(7, "greedy induction", greedy_induction());
    out.record(8, "ideal arithmetic", ideal_arithmetic());
    out.record(9, "argument principle", argument_principle());
    out.record(10, "rouche cross-validation", rouche_cross_validation());
    out.record(11, "pipeline smoke test", pipeline_smoke());
    let failed: Vec<u32> = out.0.iter().filter(|r| !r.1).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", out.0.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
