//! `grassbook` command-line front end.
//!
//! Every subcommand is deterministic given its flags: worker count (`--threads`)
//! never changes an output byte. Data goes to files, or to standard output
//! for `--out -`; diagnostics go to standard error.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channels::ChannelError;
use crate::codebooks::CodebookError;
use crate::manifold::ManifoldError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("every requested family failed")]
    AllFailed,
}

#[derive(Debug, Parser)]
#[command(
    name = "grassbook",
    version,
    about = "Learned Grassmannian beamforming codebooks",
    args_override_self = true
)]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Flat `key = value` file with default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

const SUBCOMMANDS: &[&str] = &["gen", "train", "eval", "compare", "ripley", "info"];

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a channel dataset.
    Gen(GenArgs),
    /// Train a codebook on the training split of a dataset.
    Train(TrainArgs),
    /// Evaluate a codebook on a dataset.
    Eval(EvalArgs),
    /// Train or build several codebook families and evaluate them side by side.
    Compare(CompareArgs),
    /// Pairwise-distance curve of the MRT directions against uniform lines.
    Ripley(RipleyArgs),
    /// Print the header of a dataset or codebook file.
    Info(InfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Rayleigh,
    Correlated,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Init {
    /// Squared-distance weighted seeding over the data.
    Dsq,
    /// Random distinct data points.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Gain,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Learned,
    LearnedProduct,
    KpDft,
    Glp,
    CorrelatedGlp,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Receive antennas.
    #[arg(long, default_value_t = 1)]
    mr: usize,
    /// Transmit antennas; may be omitted when --mv and --mh are given.
    #[arg(long)]
    mt: Option<usize>,
    /// Planar array rows.
    #[arg(long)]
    mv: Option<usize>,
    /// Planar array columns.
    #[arg(long)]
    mh: Option<usize>,
    /// Number of channels.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: String,
    /// Exponential correlation coefficient (correlated model).
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Cluster centre `AZ,EL` in degrees (geometric model, repeatable).
    #[arg(long = "cluster", value_name = "AZ,EL", allow_hyphen_values = true)]
    clusters: Vec<String>,
    /// Uniform angular spread around a cluster centre, degrees.
    #[arg(long, default_value_t = 5.0)]
    spread: f64,
    /// Paths per channel.
    #[arg(long, default_value_t = 1)]
    paths: usize,
    /// Comma-separated per-path gain standard deviations.
    #[arg(long)]
    gains: Option<String>,
    /// Element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
}

#[derive(Debug, Args)]
struct KMeansArgs {
    /// Independent K-means runs; the best is kept.
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = Init::Dsq)]
    init: Init,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Codebook bits (full codebook).
    #[arg(long, required_unless_present = "product")]
    bits: Option<u32>,
    /// Train a Kronecker product codebook; needs --bv and --bh.
    #[arg(long, requires_all = ["bv", "bh"], conflicts_with = "bits")]
    product: bool,
    #[arg(long)]
    bv: Option<u32>,
    #[arg(long)]
    bh: Option<u32>,
    /// Fraction of the dataset used for training.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    #[arg(long)]
    seed: u64,
    /// Codebook path; product mode writes `<stem>.v.gbcb` and `<stem>.h.gbcb`.
    #[arg(long)]
    out: String,
    /// Per-iteration distortion CSV (default `<stem>.log.csv`).
    #[arg(long)]
    log: Option<String>,
    #[command(flatten)]
    kmeans: KMeansArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Codebook path, or the `--out` value used for product training.
    #[arg(long)]
    codebook: String,
    #[arg(long)]
    product: bool,
    #[arg(long, value_enum, default_value_t = Rule::Distance)]
    rule: Rule,
    /// Evaluate only the test part of this split (needs --seed).
    #[arg(long, requires = "seed")]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Value of the `codebook` column (default: codebook file name).
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "-")]
    out: String,
    /// Per-channel records CSV.
    #[arg(long)]
    per_sample: Option<String>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated families.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "learned,learned-product,kp-dft,glp,correlated-glp"
    )]
    families: Vec<Family>,
    /// Comma-separated bit budgets for full codebooks.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    bits: Vec<u32>,
    /// Comma-separated `BV:BH` budgets for product codebooks (default: an
    /// even split of every --bits value).
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Rule::Distance)]
    rule: Rule,
    #[arg(long, default_value = "-")]
    out: String,
    #[command(flatten)]
    kmeans: KMeansArgs,
    /// Line-packing restarts.
    #[arg(long, default_value_t = 8)]
    glp_restarts: usize,
    /// Line-packing sweeps per restart.
    #[arg(long, default_value_t = 2000)]
    glp_iters: usize,
}

#[derive(Debug, Args)]
struct RipleyArgs {
    #[arg(long)]
    data: PathBuf,
    /// Number of grid points on [0, 1].
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Uniform pairs in the Monte Carlo reference.
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    /// Use only the first N channels.
    #[arg(long)]
    max_points: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Args)]
struct InfoArgs {
    file: PathBuf,
}

/// Parses `args` (program name first) and runs the selected subcommand.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| {
            a.into()
                .into_string()
                .map_err(|a| CliError::Usage(format!("argument is not UTF-8: {a:?}")))
        })
        .collect::<Result<_, _>>()?;
    let args = config::expand(args, SUBCOMMANDS)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::Usage(e.render().to_string().trim_end().to_string()));
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compare(a) => commands::compare(a),
        Command::Ripley(a) => commands::ripley(a),
        Command::Info(a) => commands::info(a),
    })
}

/// Process entry point; returns the exit code.
pub fn main() -> i32 {
    match run(std::env::args_os()) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
