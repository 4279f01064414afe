mod commands;
mod config;
mod logger;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// GAN-based minority-class augmentation: phantom data, patch extraction,
/// GAN training and synthesis, and the classifier evaluation matrix.
#[derive(Debug, Parser)]
#[command(name = "ganaug", version)]
struct Cli {
    /// Print debug messages to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Print only errors to stderr.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a procedural phantom patch dataset.
    Phantom(PhantomArgs),
    /// Cut mass and normal patches from an annotated image.
    Extract(ExtractArgs),
    /// Train the GAN on the mass patches of a dataset.
    TrainGan(TrainGanArgs),
    /// Sample synthetic mass patches from a generator checkpoint.
    Synth(SynthArgs),
    /// Run the strategy × k × repetition classifier matrix and write the report.
    EvalMatrix(EvalMatrixArgs),
    /// Rebuild summary.csv and the F1 plot from an existing results.csv.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Output patch directory.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run config; its [phantom] section supplies defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of mass patches.
    #[arg(long)]
    pub n_pos: Option<usize>,
    /// Number of normal patches.
    #[arg(long)]
    pub n_neg: Option<usize>,
    /// Patch side in pixels (32, 64 or 128).
    #[arg(long)]
    pub size: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Output patch directory.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run config; its [extract] section supplies defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Raw image as binary PGM (8- or 16-bit); histogram-normalised before cutting.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// CSV of mass boxes with header `x,y,width,height`.
    #[arg(long)]
    pub boxes: Option<PathBuf>,
    /// Tissue mask PGM (non-zero = tissue); default is all tissue.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Patch side in pixels.
    #[arg(long)]
    pub patch_size: Option<usize>,
    /// Number of normal patches to sample.
    #[arg(long)]
    pub n_negative: Option<usize>,
    /// Random seed for negative placement.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainGanArgs {
    /// Output directory for checkpoints, training log and sample grids.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run config; its [gan] section supplies defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Patch directory; without it a phantom dataset is generated from [phantom].
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Number of epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Channels at the 4×4 stage of G and D.
    #[arg(long)]
    pub base_channels: Option<usize>,
    /// Write an 8×8 sample grid every N epochs (0 = never).
    #[arg(long)]
    pub sample_every: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output patch directory.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run config; its [synth] section supplies defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Generator checkpoint.
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    /// Number of patches.
    #[arg(long)]
    pub n: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalMatrixArgs {
    /// TOML run config with [matrix], [classifier], [gan] and [phantom] sections.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides paths.out_dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Patch directory; without it a phantom dataset is generated from [phantom].
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Matrix cells run in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Existing results.csv.
    #[arg(long)]
    pub results: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    logger::init(cli.verbose, cli.quiet);
    let outcome = match cli.command {
        Command::Phantom(a) => commands::phantom(a),
        Command::Extract(a) => commands::extract(a),
        Command::TrainGan(a) => commands::train_gan(a),
        Command::Synth(a) => commands::synth(a),
        Command::EvalMatrix(a) => commands::eval_matrix(a),
        Command::Report(a) => commands::report(a),
    };
    log::logger().flush();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code())
        }
    }
}
