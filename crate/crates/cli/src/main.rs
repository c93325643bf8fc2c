mod args;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hurwitz_lab::annulus::{self, AnnulusSpec};
use hurwitz_lab::eval::{self, ComplexPoint, PeriodicFunction};
use hurwitz_lab::ideals::{factor_shift, private_primes};
use hurwitz_lab::kronecker::{self, KroneckerProblem, SearchBudget, Strategy};
use hurwitz_lab::twist::{self, run_schedule, Outcome, ScheduleConfig, SetSource, TwistedSeries};
use hurwitz_lab::zeros::{self, argument_count, Contour, PipelineBudget, Quadrature, Rectangle};
use hurwitz_lab::{AlphaParam, Complex64, HpContext, Precision};
use serde::Serialize;
use serde_json::{json, Value};

use args::{AnnulusCommand, Cli, Command, Format, IdealsCommand, KronCommand, RunConfig, TwistCommand, ZerosCommand};
use output::Report;

const EXIT_CONFIG: u8 = 2;
const EXIT_STAGE: u8 = 3;

enum Failure {
    Config(String),
    /// A computation stopped; `partial` is still written before exiting.
    Stage {
        stage: String,
        detail: Value,
        partial: Option<Report>,
    },
}

fn config(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn stage(name: &str, detail: impl Serialize) -> Failure {
    Failure::Stage {
        stage: name.to_string(),
        detail: serde_json::to_value(detail).unwrap_or(Value::Null),
        partial: None,
    }
}

struct Settings {
    format: Format,
    precision: Precision,
    seed: u64,
    out: Option<PathBuf>,
}

fn parse_precision(s: Option<&str>) -> Result<Precision, Failure> {
    match s {
        None | Some("double") => Ok(Precision::Double),
        Some(other) => {
            let digits = other.strip_prefix("hp:").unwrap_or(other);
            let d: u32 = digits
                .parse()
                .map_err(|_| config(format!("precision `{other}` is neither `double` nor a digit count")))?;
            if !(10..=2000).contains(&d) {
                return Err(config(format!("precision of {d} digits is outside 10..=2000")));
            }
            Ok(Precision::High { digits: d })
        }
    }
}

fn parse_alpha(s: &str) -> Result<AlphaParam, Failure> {
    s.parse().map_err(|e| config(format!("alpha `{s}`: {e}")))
}

fn parse_f(s: &str) -> Result<PeriodicFunction, Failure> {
    s.parse().map_err(|e| config(format!("f `{s}`: {e}")))
}

fn parse_reals<const N: usize>(s: &str, what: &str) -> Result<[f64; N], Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config(format!("{what} `{s}` is not a list of {N} numbers")))?;
    v.try_into().map_err(|_| config(format!("{what} `{s}` needs exactly {N} numbers")))
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn to_value(v: impl Serialize) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| stage("serialize", e.to_string()))
}

fn run(command: Command, settings: &Settings) -> Result<Report, Failure> {
    match command {
        Command::Eval(a) => {
            let f = parse_f(&a.f)?;
            if let Some(q) = a.q {
                if q != f.period() {
                    return Err(config(format!("--q {q} but f has {} values", f.period())));
                }
            }
            let alpha = parse_alpha(&a.alpha)?;
            let [sigma, t] = parse_reals::<2>(&a.s, "s")?;
            let s = ComplexPoint::new(sigma, t);
            let v = if a.decompose {
                eval::decompose_tol(s, &f, &alpha, a.tol)
            } else {
                eval::lfunction(s, &f, &alpha, a.tol)
            }
            .map_err(|e| stage("eval", e.to_string()))?;
            let mut rec = complex_json(v);
            if let Precision::High { digits } = settings.precision {
                if t == 0.0 && sigma > 1.0 {
                    let mut ctx = HpContext::with_digits(digits);
                    let a_hp = ctx.alpha(&alpha);
                    let s_hp = ctx.parse(&format!("{sigma:e}"));
                    let hp = ctx.tail_sum(&f, &a_hp, &s_hp, 0);
                    rec["hp"] = Value::String(format!("{hp}"));
                }
            }
            Ok(Report::One(rec))
        }
        Command::Kron(KronCommand::Solve(a)) => {
            let strategy: Strategy = a.strategy.parse().map_err(config)?;
            let mut budget = SearchBudget {
                strategy,
                ..SearchBudget::default()
            };
            if let Some(m) = a.max_t {
                budget.max_t = m;
            }
            if let Some(m) = a.max_iterations {
                budget.max_iterations = m;
            }
            let p = KroneckerProblem::new(a.freqs, a.targets, a.delta, a.tmin).map_err(config)?;
            let sol = kronecker::solve(&p, &budget).map_err(|e| stage("kronecker", e.to_string()))?;
            Ok(Report::One(json!({ "t": sol.t, "x": sol.integer_parts, "max_error": sol.max_error })))
        }
        Command::Twist(TwistCommand::SignFlip(a)) => {
            let f = parse_f(&a.f)?;
            let alpha = parse_alpha(&a.alpha)?;
            let m = twist::truncation_index(&f, &alpha, a.delta).map_err(|e| stage("truncation", e.to_string()))?;
            let series = TwistedSeries::sign_flip(f, alpha, m);
            let sigma0 = twist::find_sigma0(&series, a.delta, a.tol).map_err(|e| stage("sigma0", e.to_string()))?;
            let value = series
                .eval(Complex64::new(sigma0, 0.0), a.tol)
                .map_err(|e| stage("sigma0", e.to_string()))?;
            Ok(Report::One(json!({ "m": m.to_string(), "sigma0": sigma0, "value": value.re })))
        }
        Command::Twist(TwistCommand::Greedy(a)) => {
            let f = parse_f(&a.f)?;
            let alpha = parse_alpha(&a.alpha)?;
            let (num, den) = a
                .scale
                .split_once('/')
                .and_then(|(n, d)| Some((n.trim().parse::<u64>().ok()?, d.trim().parse::<u64>().ok()?)))
                .filter(|(_, d)| *d > 0)
                .ok_or_else(|| config(format!("scale `{}` is not num/den", a.scale)))?;
            let cfg = ScheduleConfig {
                n1: a.n1,
                blocks: a.blocks,
                scale_num: num,
                scale_den: den,
                delta: a.delta,
                sigma: a.sigma,
            };
            let precision = match settings.precision {
                Precision::Double => Precision::High { digits: 40 },
                p => p,
            };
            let report = run_schedule(&f, &alpha, &cfg, SetSource::Authentic, Some(settings.seed), precision).map_err(|e| match e {
                twist::TwistError::Invalid(_) => config(e),
                other => stage("schedule", other.to_string()),
            })?;
            let out = match settings.format {
                Format::Json => Report::One(to_value(&report)?),
                _ => {
                    let mut rows: Vec<Value> = report.rows.iter().map(to_value).collect::<Result<_, _>>()?;
                    rows.push(json!({ "sigma": report.sigma, "outcome": to_value(&report.outcome)? }));
                    Report::Many(rows)
                }
            };
            if let Outcome::Halted { .. } = report.outcome {
                return Err(Failure::Stage {
                    stage: "schedule".into(),
                    detail: json!({ "outcome": to_value(&report.outcome)?, "last_block": to_value(report.rows.last())? }),
                    partial: Some(out),
                });
            }
            Ok(out)
        }
        Command::Annulus(AnnulusCommand::Radii(a)) => {
            let (outer, inner) = annulus::radii(&a.r).map_err(config)?;
            Ok(Report::One(json!({ "R": outer, "T": inner })))
        }
        Command::Annulus(AnnulusCommand::Realize(a)) => {
            let spec = AnnulusSpec::new(&a.r).map_err(config)?;
            let [re, im] = parse_reals::<2>(&a.z, "z")?;
            let r = annulus::realize(&spec, Complex64::new(re, im), a.tol).map_err(|e| stage("realize", e.to_string()))?;
            Ok(Report::One(json!({
                "radii": r.radii,
                "angles": r.angles,
                "sum": complex_json(r.sum()),
            })))
        }
        Command::Ideals(IdealsCommand::Factor(a)) => {
            let alpha = parse_alpha(&a.alpha)?;
            let mut rows = Vec::new();
            for n in a.n {
                let fac = factor_shift(n, &alpha).map_err(|e| stage("factor", e.to_string()))?;
                let factors: Vec<Value> = fac
                    .factors
                    .iter()
                    .map(|(p, e)| json!({ "prime": p.to_string(), "p": p.p, "root": p.root, "exponent": e, "norm": p.norm() }))
                    .collect();
                rows.push(json!({ "n": n, "norm": fac.norm.to_string(), "factors": factors }));
            }
            Ok(Report::Many(rows))
        }
        Command::Ideals(IdealsCommand::Cassels(a)) => {
            let alpha = parse_alpha(&a.alpha)?;
            let block = private_primes(a.start, a.len, &alpha).map_err(|e| stage("cassels", e.to_string()))?;
            match settings.format {
                Format::Json => Ok(Report::One(json!({
                    "N": block.start,
                    "M": block.len,
                    "density": block.density,
                    "private": block.private.iter().map(|p| json!({
                        "n": p.n,
                        "witnesses": p.witnesses.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                }))),
                _ => Ok(Report::Many(
                    block
                        .private
                        .iter()
                        .map(|p| {
                            json!({
                                "n": p.n,
                                "witness": p.witness(Some(settings.seed)).to_string(),
                                "witnesses": p.witnesses.len(),
                            })
                        })
                        .collect(),
                )),
            }
        }
        Command::Zeros(ZerosCommand::Count(a)) => {
            let f = parse_f(&a.f)?;
            let alpha = parse_alpha(&a.alpha)?;
            let [s0, s1, t0, t1] = parse_reals::<4>(&a.rect, "rect")?;
            let rect = Rectangle::new(s0, s1, t0, t1).map_err(config)?;
            let g = |s: Complex64| Ok(eval::lfunction(s.into(), &f, &alpha, a.tol)?);
            let count = argument_count(&g, &Contour::Rect(rect), &Quadrature::default())
                .map_err(|e| stage("count", e.to_string()))?;
            Ok(Report::One(json!({ "rect": to_value(rect)?, "count": count })))
        }
        Command::Zeros(ZerosCommand::Pipeline(a)) => {
            let f = parse_f(&a.f)?;
            let alpha = parse_alpha(&a.alpha)?;
            let mut budget = PipelineBudget::default();
            if let Some(t) = a.budget {
                budget.kronecker.max_t = t;
            }
            if let Some(n) = a.terms {
                budget.terms = n;
            }
            if let Some(n) = a.attempts {
                budget.attempts = n;
            }
            match zeros::find_zero_pipeline(&f, &alpha, a.delta, &budget) {
                Ok(rec) => Ok(Report::Many(vec![to_value(rec)?])),
                Err(failure) => Err(stage("pipeline", failure)),
            }
        }
    }
}

fn load(cli: Cli) -> Result<(Command, Settings, Option<usize>), Failure> {
    let (command, format, precision, seed, out, threads) = match cli.config {
        Some(_) if cli.command.is_some() => return Err(config("--config cannot be combined with a command")),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            let c: RunConfig = serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
            // command-line flags override the file
            (
                c.command,
                cli.format.or(c.format),
                cli.precision.or(c.precision),
                cli.seed.or(c.seed),
                cli.out.or(c.out),
                cli.threads.or(c.threads),
            )
        }
        None => {
            let command = cli.command.ok_or_else(|| config("no command given (see --help)"))?;
            (command, cli.format, cli.precision, cli.seed, cli.out, cli.threads)
        }
    };
    let settings = Settings {
        format: format.unwrap_or(Format::Json),
        precision: parse_precision(precision.as_deref())?,
        seed: seed.unwrap_or(0),
        out,
    };
    Ok((command, settings, threads))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(cli).and_then(|(command, settings, threads)| {
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(config)?;
        }
        let report = run(command, &settings);
        Ok((report, settings))
    });
    let (report, settings) = match result {
        Ok(v) => v,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(Failure::Stage { .. }) => unreachable!("stage failures come from run"),
    };
    let write = |r: &Report| -> Result<(), String> {
        let text = output::render(r, settings.format)?;
        output::emit(&text, settings.out.as_deref()).map_err(|e| e.to_string())
    };
    match report {
        Ok(r) => match write(&r) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{}", json!({ "error": "output", "message": e }));
                ExitCode::from(EXIT_STAGE)
            }
        },
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Stage { stage, detail, partial }) => {
            if let Some(p) = partial {
                let _ = write(&p);
            }
            eprintln!("{}", json!({ "error": "stage_failure", "stage": stage, "detail": detail }));
            ExitCode::from(EXIT_STAGE)
        }
    }
}
