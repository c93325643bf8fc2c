use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "hzlab", version, about = "Generalized Hurwitz zeta laboratory")]
pub struct Cli {
    /// `double`, or a digit count for software floats (e.g. `40` or `hp:40`).
    #[arg(long, global = true)]
    pub precision: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Read the whole run from a JSON file instead of the command line.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Contents of a `--config` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub precision: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Evaluate L(s, f, α).
    Eval(EvalArgs),
    /// Simultaneous approximation.
    #[command(subcommand)]
    Kron(KronCommand),
    /// Twisted series: sign flip and block induction.
    #[command(subcommand)]
    Twist(TwistCommand),
    /// Sums of vectors with fixed lengths and free directions.
    #[command(subcommand)]
    Annulus(AnnulusCommand),
    /// Factorization of n + α in a quadratic field.
    #[command(subcommand)]
    Ideals(IdealsCommand),
    /// Zero counting and the certified zero pipeline.
    #[command(subcommand)]
    Zeros(ZerosCommand),
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    /// Values f(1), …, f(q).
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// Period; must match the number of values when given.
    #[arg(long)]
    #[serde(default)]
    pub q: Option<usize>,
    #[arg(long)]
    pub alpha: String,
    /// `sigma,t`.
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
    #[arg(long, default_value_t = 1e-12)]
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Evaluate through the residue-class decomposition.
    #[arg(long)]
    #[serde(default)]
    pub decompose: bool,
}

fn default_tol() -> f64 {
    1e-12
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum KronCommand {
    Solve(KronSolveArgs),
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KronSolveArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub freqs: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub targets: Vec<f64>,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub tmin: f64,
    #[arg(long, default_value = "grid")]
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[arg(long)]
    #[serde(default)]
    pub max_t: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub max_iterations: Option<u64>,
}

fn default_strategy() -> String {
    "grid".into()
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TwistCommand {
    /// Truncation index and the real zero of the sign-flip series.
    SignFlip(SignFlipArgs),
    /// Block induction with character weights.
    Greedy(GreedyArgs),
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignFlipArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    #[serde(default = "default_f")]
    pub f: String,
    #[arg(long, default_value = "rat:1,1")]
    #[serde(default = "default_rat")]
    pub alpha: String,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-12)]
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_f() -> String {
    "1".into()
}

fn default_rat() -> String {
    "rat:1,1".into()
}

fn default_quad() -> String {
    "quad:0,1,2".into()
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedyArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    #[serde(default = "default_f")]
    pub f: String,
    #[arg(long, default_value = "quad:0,1,2")]
    #[serde(default = "default_quad")]
    pub alpha: String,
    #[arg(long, default_value_t = 50)]
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_n1")]
    pub n1: u64,
    /// Block length M = max(1, ⌊N·num/den⌋), given as `num/den`.
    #[arg(long, default_value = "1/100")]
    #[serde(default = "default_scale")]
    pub scale: String,
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[arg(long)]
    #[serde(default)]
    pub sigma: Option<f64>,
}

fn default_blocks() -> usize {
    50
}

fn default_n1() -> u64 {
    1000
}

fn default_scale() -> String {
    "1/100".into()
}

fn default_delta() -> f64 {
    0.5
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnnulusCommand {
    Radii(RadiiArgs),
    Realize(RealizeArgs),
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    /// Target `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, default_value_t = 1e-12)]
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum IdealsCommand {
    Factor(FactorArgs),
    Cassels(CasselsArgs),
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorArgs {
    #[arg(long, default_value = "quad:0,1,2")]
    #[serde(default = "default_quad")]
    pub alpha: String,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub n: Vec<i64>,
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasselsArgs {
    #[arg(long, default_value = "quad:0,1,2")]
    #[serde(default = "default_quad")]
    pub alpha: String,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub start: u64,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub len: u64,
}

#[derive(Debug, Subcommand, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ZerosCommand {
    /// Zeros of L(s + i·shift) inside a rectangle.
    Count(CountArgs),
    /// Sign flip, Kronecker shift, Rouché certificate and Newton refinement.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    #[serde(default = "default_f")]
    pub f: String,
    #[arg(long, default_value = "rat:1,1")]
    #[serde(default = "default_rat")]
    pub alpha: String,
    /// `sigma_min,sigma_max,t_min,t_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long, default_value_t = 1e-12)]
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    #[serde(default = "default_f")]
    pub f: String,
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Largest Kronecker shift t to search.
    #[arg(long)]
    #[serde(default)]
    pub budget: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub terms: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub attempts: Option<usize>,
}
