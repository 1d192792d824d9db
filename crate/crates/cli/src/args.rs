//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "nfr",
    version,
    about = "Neighborhood filtering on the decreasing rearrangement"
)]
pub struct Cli {
    /// Append the JSON-lines run report to this file instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the decreasing rearrangement and histogram of an image as CSV.
    Rearrange(RearrangeArgs),
    /// Filter an image with the rearranged NF or a reference filter.
    Denoise(DenoiseArgs),
    /// Segment an image into the flat regions of the converged filter.
    Segment(SegmentArgs),
    /// Add seeded Gaussian noise at a given SNR.
    Noise(NoiseArgs),
    /// Count kernel evaluations and time one step per image size.
    Bench(BenchArgs),
    /// RMSE and SNR of images against a clean reference.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Gaussian,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterKind {
    Nf,
    NfDirect,
    Bilateral,
    Nlm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Varying,
    Fixed,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kernel: KernelKind,
    /// Kernel width, in intensity units.
    #[arg(long)]
    pub h: Option<f64>,
    /// Exponent of the power kernel `1/(1+|s|^p)`, p > 1 [default: 2].
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct IterArgs {
    /// Weights from the current iterate (varying) or the input (fixed).
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Relative functional decrement that stops iteration [default: 1e-5].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Upper bound on filter steps [default: 100].
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RearrangeArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output prefix; writes `<prefix>.rearrangement.csv` and `<prefix>.histogram.csv`.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "nf")]
    pub filter: FilterKind,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Exact step count for nf/nf-direct (disables the stopping rule), or
    /// number of passes for bilateral/nlm [default: 1].
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Spatial (bilateral) or patch-weight (nlm) width [default: 2 / 1].
    #[arg(long)]
    pub rho: Option<f64>,
    /// NLM patch radius [default: 1].
    #[arg(long)]
    pub patch: Option<usize>,
    /// Search window radius [default: ceil(3 rho) / 10].
    #[arg(long)]
    pub window: Option<usize>,
    /// Also write the unrounded result as `row,col,value` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output prefix; writes `<prefix>.labels.pgm`, `<prefix>.mask<k>.pgm`
    /// and `<prefix>.regions.csv`.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Levels closer than this fraction of the dynamic range merge.
    #[arg(long = "merge-tol", default_value_t = nfr_core::segmentation::DEFAULT_MERGE_TOL)]
    pub merge_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Ratio of image standard deviation to noise standard deviation.
    #[arg(long)]
    pub snr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clamp the noisy values to `[0, maxval]` before anything is written.
    #[arg(long)]
    pub clamp: bool,
    /// Also write the unrounded result as `row,col,value` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Square image sides to test.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    pub sizes: Vec<usize>,
    /// Number of distinct levels in each synthetic image.
    #[arg(long, default_value_t = 256)]
    pub levels: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest pixel count for which the N² direct step is run.
    #[arg(long = "naive-limit", default_value_t = 4096)]
    pub naive_limit: usize,
    /// Leave timing columns empty so the CSV is reproducible.
    #[arg(long = "omit-timings")]
    pub omit_timings: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Clean reference image.
    #[arg(long)]
    pub reference: PathBuf,
    /// Images to score.
    #[arg(short, long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// CSV destination; printed to stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
