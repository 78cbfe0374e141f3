//! `bfan`: batch analysis, check suites, family generation and sharpness tables.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "bfan",
    version,
    about = "Exact Fourier analysis of Boolean functions"
)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Add a wall-clock `timestamp` field to reports
    #[arg(long, global = true)]
    timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum, influences and their maximizers for one truth table
    Analyze(AnalyzeArgs),
    /// Run a check battery
    Verify(VerifyArgs),
    /// Write the truth table of a named family
    Generate(GenerateArgs),
    /// Hypertribe sharpness ratios over a list of dimensions
    Sharpness(SharpnessArgs),
    /// Closest low-degree Boolean function and coefficient deviations
    Approx(ApproxArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// TT1 or TTB file
    #[arg(long)]
    input: std::path::PathBuf,
    /// Largest set size to report (defaults to min(n, 3))
    #[arg(long)]
    d: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// main-theorem, chain, kkl-identity, fkn-identity, hypercontractivity, log-sobolev, lattice or all
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 4)]
    n_max: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random functions per battery (or per dimension beyond the exhaustive range)
    #[arg(long)]
    samples: Option<usize>,
    /// Emit every check record, not only failures and the tightest case per check
    #[arg(long)]
    records: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Dictator,
    Parity,
    Majority,
    And,
    Or,
    Tribes,
    Hypertribe,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: u32,
    /// Block width of tribes
    #[arg(long)]
    w: Option<u32>,
    /// Coordinate of a dictator (1-based)
    #[arg(long, default_value_t = 1)]
    coord: usize,
    /// Set size of a hypertribe packing
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Block size of a hypertribe (defaults to round(d log2(n / log2 n)))
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output truth table; `.ttb` selects the binary format, anything else TT1
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Comma-separated dimensions, each at least 4
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    n_list: Vec<u32>,
    /// Samples for the sign probabilities
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Random d-sets per sampled dimension
    #[arg(long, default_value_t = 200)]
    sets: usize,
    /// Samples per d-set
    #[arg(long, default_value_t = 10_000)]
    set_samples: u64,
    /// Samples per coefficient of the low levels
    #[arg(long, default_value_t = 10_000)]
    level_samples: u64,
    /// Largest dimension computed exactly
    #[arg(long, default_value_t = 16)]
    exact_max_n: u32,
    /// Total sample budget per dimension
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Block size override
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    #[arg(long)]
    input: std::path::PathBuf,
    #[arg(long)]
    d: u32,
    /// Use the coefficient-lattice search (needed above 4 variables)
    #[arg(long)]
    lattice: bool,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = output::Context::new(cli.timestamp);
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Verify(a) => commands::verify(&ctx, a),
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Sharpness(a) => commands::sharpness(&ctx, a),
        Command::Approx(a) => commands::approx(&ctx, a),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
