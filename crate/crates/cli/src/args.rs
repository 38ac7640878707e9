use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mutacyc_core::search::MEMORY_CAP_ENV;
use mutacyc_core::Encoding;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "mutacyc",
    version,
    about = "Mutation-acyclicity of rank-4 quivers: proof, datasets and learning experiments"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the resolved run configuration to this JSON file.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// A fully resolved invocation; re-running it reproduces the outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Classify every connected rank-4 quiver with weights at most 2.
    Prove(ProveArgs),
    /// Generate a dataset CSV and its manifest.
    Gen(GenArgs),
    /// Principal component analysis of a dataset.
    Pca(PcaArgs),
    /// Train and evaluate a polynomial-kernel SVM.
    Svm(SvmArgs),
    /// Train and evaluate dense neural networks.
    Nn(NnArgs),
    /// Classify a single quiver.
    Predict(PredictArgs),
    /// Re-run a saved configuration.
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ProveArgs {
    /// Ledger output (one JSON record per class).
    #[arg(long, default_value = "ledger.jsonl")]
    pub out: PathBuf,
    /// Human-readable report (default: next to the ledger).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub max_nma_seed_depth: usize,
    #[arg(long, default_value_t = 12)]
    pub max_resolve_depth: usize,
    /// Memory cap in bytes for a single exploration.
    #[arg(long, env = MEMORY_CAP_ENV)]
    pub memory_cap: Option<u64>,
    /// Re-check every witness after the run.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct GenArgs {
    /// Dataset number (1-4).
    #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
    pub dataset: u8,
    #[arg(long, default_value = "dataset.csv")]
    pub out: PathBuf,
    /// Manifest output (default: `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value = "flat16")]
    pub encoding: Encoding,
    /// Seed-list JSON for dataset 3 (default: built-in construction).
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Proof ledger, required for dataset 4.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Label classes the ledger left undetermined as NMA.
    #[arg(long)]
    pub undetermined_as_nma: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PcaArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "pca-out")]
    pub out_dir: PathBuf,
    /// Components kept in the projection CSV.
    #[arg(long, default_value_t = 6)]
    pub dims: usize,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
    /// Split without per-class proportions.
    #[arg(long)]
    pub unstratified: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SvmArgs {
    /// Binary dataset (converted to the upper-triangle encoding).
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "svm-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub weight_ma: f64,
    #[arg(long, default_value_t = 3.998)]
    pub weight_nma: f64,
    /// Kernel scale (default: 1 / (feature variance * dimension)).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_passes: usize,
    #[arg(long, default_value_t = 2048)]
    pub cache_mb: usize,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Also write the explicit polynomial as CSV.
    #[arg(long)]
    pub expand: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// SELU, ReLU, tanh (128 each), dropout 0.4, batch 200.
    Deep,
    /// SELU, ReLU (128 each), dropout 0.3, batch 100.
    Shallow,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct NnArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "nn-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value_t = Architecture::Deep)]
    pub arch: Architecture,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    pub learning_rate: f64,
    /// Fraction of the non-test rows used for validation.
    #[arg(long, default_value_t = 0.3)]
    pub validation_fraction: f64,
    /// Keep the class imbalance instead of downsampling.
    #[arg(long)]
    pub no_balance: bool,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    /// Quiver as a JSON matrix, inline or as a file path.
    pub quiver: String,
    /// Decide exactly via the ledger and bounded search.
    #[arg(long)]
    pub exact: bool,
    /// Ledger consulted by `--exact`.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Bounded-search depth for quivers outside the ledger.
    #[arg(long, default_value_t = mutacyc_core::proof::DEFAULT_DECIDE_DEPTH)]
    pub depth: usize,
    /// SVM model JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub config: PathBuf,
}
