mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparselr::Error;

#[derive(Parser)]
#[command(name = "sparselr", version, about = "Sparse + low-rank tensor completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a sampling mask (MSK1).
    Mask(MaskArgs),
    /// Complete a partially observed image, video or tensor.
    Complete(CompleteArgs),
    /// PSNR and SSIM between two inputs.
    Metrics(MetricsArgs),
    /// DCT sparsity level at a list of truncation thresholds.
    Sparsity(SparsityArgs),
    /// Completion quality over a grid of sampling rates and seeds.
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct MaskArgs {
    /// Comma-separated extents, e.g. 256,256,3.
    #[arg(long, value_delimiter = ',', conflicts_with = "like")]
    pub shape: Option<Vec<usize>>,
    /// Take the shape from an existing tensor, image or frame directory.
    #[arg(long)]
    pub like: Option<PathBuf>,
    /// Fraction of observed entries, in (0, 1].
    #[arg(long, conflicts_with = "from_image", required_unless_present = "from_image")]
    pub sr: Option<f64>,
    #[arg(long, conflicts_with = "from_image")]
    pub seed: Option<u64>,
    /// Structural mask: white pixels (>= 128) are observed, replicated over
    /// the trailing modes of the target shape (default: the image's H x W).
    #[arg(long)]
    pub from_image: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CompleteArgs {
    /// Observed data: `.tnsr`, `.ppm/.pgm/.png`, or a frame directory.
    #[arg(long)]
    pub input: PathBuf,
    /// MSK1 file or structural mask image.
    #[arg(long)]
    pub mask: PathBuf,
    /// Solver configuration (JSON). WNN defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path; format follows the extension (none = frame directory).
    #[arg(long)]
    pub out: PathBuf,
    /// Ground truth, for metrics and ORACLE stopping.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-iteration CSV history.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Dynamic range for SSIM; inferred from the data when omitted.
    #[arg(long)]
    pub range: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SsimModeArg {
    Windowed,
    Global,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub range: Option<f64>,
    #[arg(long, value_enum, default_value = "windowed")]
    pub ssim_mode: SsimModeArg,
}

#[derive(Args)]
pub struct SparsityArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated truncation thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tn: Vec<f64>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Complete data the masks are applied to.
    #[arg(long)]
    pub input: PathBuf,
    /// Reference for PSNR/SSIM; defaults to the input.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sr: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Concurrent runs; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub range: Option<f64>,
}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Failures that end a command, with their exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } | Error::NonFinite(_) | Error::Svd(_) | Error::ZeroDenominator => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mask(a) => commands::mask(&a),
        Command::Complete(a) => commands::complete(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Sparsity(a) => commands::sparsity(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
