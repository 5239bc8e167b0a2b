//! Command-line grammar.

use std::ops::Range;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use queuemax::asymptotics::Method;
use queuemax::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "queuemax",
    version,
    about = "Maximum queue length at a periodic traffic signal"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the result here and the run manifest to `<out>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Law of the running maximum M_n.
    Maxdist(DistArgs),
    /// Joint law of (S_n, M_n).
    Jointdist(DistArgs),
    /// Compare generating-function coefficients with the DP (one-step cycle).
    GfCheck(GfCheckArgs),
    /// Closed forms and boundary cascade for the two-step cycle.
    Ell2Verify(Ell2Args),
    /// Limiting queue-length law for p < 1/2.
    Stationary(StationaryArgs),
    /// Limit constants and convergence of the scaled maximum.
    Asymptotics(AsymptoticsArgs),
    /// Monte Carlo moments of M_n.
    Simulate(SimulateArgs),
    /// Compare scaled moments across cycle lengths.
    Universality(UniversalityArgs),
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "exact")]
    pub mode: Mode,
    /// Truncate the maximum at this level (float mode defaults to about 6σ).
    #[arg(long)]
    pub amax: Option<usize>,
    /// Wrap the result with parameters and truncation loss.
    #[arg(long)]
    pub detail: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GfCheckArgs {
    #[arg(long)]
    pub p: String,
    /// Level of the maximum.
    #[arg(long, default_value_t = 1)]
    pub a: usize,
    #[arg(long, default_value_t = 25)]
    pub terms: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Ell2Args {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub lambda: f64,
    /// Highest cascade level.
    #[arg(long, default_value_t = 5)]
    pub amax: usize,
    /// DP partial-sum terms.
    #[arg(long, default_value_t = 60)]
    pub terms: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long, default_value_t = 20)]
    pub xmax: usize,
    /// Include roots, weights, moments and tail mass.
    #[arg(long)]
    pub detail: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Comma-separated horizons; omit to print only the constants.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value = "dp")]
    pub method: Method,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Only run replicas START..END (end exclusive) of the `--reps` run.
    #[arg(long, value_parser = parse_range)]
    pub replicas: Option<Range<u64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct UniversalityArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub ells: Vec<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_range(text: &str) -> Result<Range<u64>, String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got {text:?}"))?;
    let lo: u64 = lo.parse().map_err(|e| format!("bad start {lo:?}: {e}"))?;
    let hi: u64 = hi.parse().map_err(|e| format!("bad end {hi:?}: {e}"))?;
    if lo >= hi {
        return Err(format!("empty replica range {lo}..{hi}"));
    }
    Ok(lo..hi)
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Maxdist(_) => "maxdist",
            Command::Jointdist(_) => "jointdist",
            Command::GfCheck(_) => "gf-check",
            Command::Ell2Verify(_) => "ell2-verify",
            Command::Stationary(_) => "stationary",
            Command::Asymptotics(_) => "asymptotics",
            Command::Simulate(_) => "simulate",
            Command::Universality(_) => "universality",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Maxdist(a) | Command::Jointdist(a) => &a.output,
            Command::GfCheck(a) => &a.output,
            Command::Ell2Verify(a) => &a.output,
            Command::Stationary(a) => &a.output,
            Command::Asymptotics(a) => &a.output,
            Command::Simulate(a) => &a.output,
            Command::Universality(a) => &a.output,
        }
    }
}
