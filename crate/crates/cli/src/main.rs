//! `ppc`: train proximity preserving codes, encode new data, query and
//! evaluate the resulting Hamming index, or run the signed min-cut solver on
//! its own.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::Precision;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] ppc::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) if e.is_validation() => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ppc", version, about = "Proximity preserving binary codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset.
    Synth(SynthArgs),
    /// Learn codes and hash functions for a dataset.
    Train(TrainArgs),
    /// Map a feature file to a codes file with a trained model.
    Encode(EncodeArgs),
    /// Radius or k-nearest-neighbor lookups in a codes file.
    Query(QueryArgs),
    /// Precision/recall, AUC and joint histogram for codes of a dataset.
    Eval(EvalArgs),
    /// Solve a single signed min-cut instance.
    Cut(CutArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SynthKind {
    /// Gaussian blobs with class labels.
    Blobs,
    /// Uniform points in a square, no labels.
    Plane,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "blobs")]
    kind: SynthKind,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 3)]
    blobs: usize,
    #[arg(long, default_value_t = 5.0)]
    center_box: f64,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Plane points are drawn from [-half_width, half_width]².
    #[arg(long, default_value_t = 10.0)]
    half_width: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `.f32`/`.raw` writes raw floats plus a JSON sidecar, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AffinityArg {
    Class,
    Radius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum UpdateArg {
    Bit,
    Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Random,
    Fiedler,
    SignedLaplacian,
    RandomProjection,
}

#[derive(Debug, Args)]
struct AffinityFlags {
    #[arg(long, value_enum)]
    affinity: Option<AffinityArg>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    avg_neighbors: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bits: Option<usize>,
    #[arg(long, value_enum)]
    update: Option<UpdateArg>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training features (CSV, or raw `.f32` with a `.json` sidecar).
    data: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model JSON; codes and log default to siblings of this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    codes: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
    #[command(flatten)]
    affinity: AffinityFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["alpha", "k"]))]
struct QueryArgs {
    /// Codes file to search.
    #[arg(long)]
    codes: PathBuf,
    /// Codes file with the query points.
    #[arg(long)]
    queries: PathBuf,
    /// Return everything within this (doubled) Hamming distance.
    #[arg(long)]
    alpha: Option<f64>,
    /// Return the k nearest codes.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Dataset the codes were computed for; supplies the near/far labels.
    data: PathBuf,
    #[arg(long)]
    codes: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    affinity: AffinityFlags,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Directory receiving `pr.csv`, `histogram.csv` and `summary.csv`.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MatrixFormatArg {
    Dense,
    Triples,
}

#[derive(Debug, Args)]
struct CutArgs {
    matrix: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    format: MatrixFormatArg,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    #[arg(long, value_enum, default_value = "bit")]
    update: UpdateArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
}

/// Flattens multi-line clap output to one diagnostic line.
fn one_line(text: &str) -> String {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("ppc: {}", one_line(&e.render().to_string()));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Synth(args) => commands::synth(args),
        Command::Train(args) => commands::train(args),
        Command::Encode(args) => commands::encode(args),
        Command::Query(args) => commands::query(args),
        Command::Eval(args) => commands::eval(args),
        Command::Cut(args) => commands::cut(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ppc: error: {}", one_line(&e.to_string()));
            ExitCode::from(e.exit_code())
        }
    }
}
