mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit code for unreadable or unwritable files.
const EXIT_IO: u8 = 3;
/// Exit code for invalid or inconsistent inputs.
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pmlda",
    about = "Hyperspectral unmixing with Gaussian endmember distributions and superpixel documents",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate endmembers and proportion maps from a cube.
    Unmix(UnmixArgs),
    /// Generate a synthetic scene and its truth record.
    Generate(GenerateArgs),
    /// Score unmixing results; with a truth record, also report endmember
    /// angles after optimal matching.
    Evaluate(EvaluateArgs),
}

#[derive(clap::Args)]
struct UnmixArgs {
    /// Cube payload (binary with <path>.hdr sidecar, or .csv).
    #[arg(long)]
    cube: Option<PathBuf>,
    /// Segmentation raster (.csv of labels or single-band binary raster).
    /// Without it, a block grid is used.
    #[arg(long)]
    segmentation: Option<PathBuf>,
    /// Number of endmembers.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Dirichlet concentration for document proportions.
    #[arg(long)]
    alpha: Option<f64>,
    /// Rate of the exponential prior on document mixing levels.
    #[arg(long)]
    lambda: Option<f64>,
    /// Sampler iterations.
    #[arg(long = "T")]
    t: Option<usize>,
    /// Iterations discarded before posterior summaries (default T/2).
    #[arg(long = "burn-in")]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the document updates (env PMLDA_THREADS as
    /// fallback). Any value yields identical results.
    #[arg(long)]
    threads: Option<usize>,
    /// Word-likelihood mode: normalized | raw-product.
    #[arg(long)]
    mode: Option<String>,
    /// Point estimator: mean | map.
    #[arg(long)]
    estimator: Option<String>,
    /// CSV of K x bands seed means, overriding the built-in initializer.
    #[arg(long = "seeds-file")]
    seeds_file: Option<PathBuf>,
    /// Block side for the grid segmentation fallback.
    #[arg(long)]
    block: Option<usize>,
    /// Plain key=value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    bands: usize,
    /// Number of endmembers.
    #[arg(long = "K")]
    k: usize,
    /// Endmember variance (0 produces noiseless pixels).
    #[arg(long)]
    sigma2: f64,
    #[arg(long, default_value_t = 5.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mixing model: ncm | geometric-mean | lmm+noise.
    #[arg(long, default_value = "geometric-mean")]
    mixing: String,
    /// Block side for the document grid.
    #[arg(long, default_value_t = 16)]
    block: usize,
    /// CSV of K x bands true means; otherwise deterministic well-separated
    /// means are used.
    #[arg(long = "means-file")]
    means_file: Option<PathBuf>,
    /// Force one pure (one-hot membership) pixel per endmember.
    #[arg(long = "pure-pixels", default_value_t = false)]
    pure_pixels: bool,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Cube the results were computed from.
    #[arg(long)]
    cube: PathBuf,
    /// Directory written by `pmlda unmix`.
    #[arg(long = "result-dir")]
    result_dir: PathBuf,
    /// Truth record from `pmlda generate`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write the metrics as CSV.
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Unmix(args) => commands::unmix::run(args),
        Command::Generate(args) => commands::generate::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let is_io = err.chain().any(|cause| {
                cause
                    .downcast_ref::<pmlda_core::Error>()
                    .is_some_and(|e| e.is_io())
                    || cause.downcast_ref::<std::io::Error>().is_some()
            });
            ExitCode::from(if is_io { EXIT_IO } else { EXIT_VALIDATION })
        }
    }
}
