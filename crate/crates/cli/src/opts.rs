//! Command-line surface.

use clap::{Args, Parser, Subcommand};
use combigcn_core::ModelVariant;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "combigcn",
    version,
    about = "Dual-graph light graph convolution recommender pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduce a raw interaction log to a dense popular-item core and
    /// optionally split it per user into train/test files.
    Preprocess(PreprocessArgs),
    /// Train a model variant and write the best-epoch checkpoint.
    Train(TrainArgs),
    /// Score a checkpoint against a test set and print metrics JSON.
    Evaluate(EvaluateArgs),
    /// Print the top-K unseen items for one user.
    Recommend(RecommendArgs),
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    ModelVariant::parse(s).ok_or_else(|| format!("unknown variant {s:?} (expected combigcn, lightgcn or bprmf)"))
}

/// Graph construction flags shared by every command that rebuilds the
/// propagation graphs from a training file.
#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Model variant: combigcn, lightgcn or bprmf.
    #[arg(long, default_value = "combigcn", value_parser = parse_variant)]
    pub variant: ModelVariant,

    /// Number of propagation layers (ignored for bprmf, which forces 0).
    #[arg(long, default_value_t = 3)]
    pub layers: usize,

    /// Quantization bins for the user-user weight matrix.
    #[arg(long, default_value_t = 10)]
    pub bins: usize,

    /// Keep self-loops (a user's own similarity) in the weight matrix.
    #[arg(long, default_value_t = false)]
    pub self_loops: bool,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Input interaction TSV (`user<TAB>item` per line).
    #[arg(long)]
    pub input: PathBuf,

    /// Output path for the reduced TSV; stats are written next to it.
    #[arg(long)]
    pub out: PathBuf,

    /// Size of the popular-item core (defaults to every item).
    #[arg(long)]
    pub core_items: Option<usize>,

    /// Target users per core item.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,

    /// Users must keep strictly more core interactions than this.
    #[arg(long, default_value_t = 10)]
    pub min_interactions: usize,

    /// Also write per-user train/test splits with this train fraction.
    #[arg(long)]
    pub split_fraction: Option<f64>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training interactions TSV.
    #[arg(long)]
    pub train: PathBuf,

    /// Test interactions TSV (evaluated for early stopping).
    #[arg(long)]
    pub test: PathBuf,

    /// Checkpoint output path; history CSV is written next to it.
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 64)]
    pub dim: usize,

    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,

    #[arg(long, default_value_t = 1e-5)]
    pub l2: f64,

    #[arg(long, default_value_t = 2048)]
    pub batch: usize,

    /// Ranking cutoff for evaluation and early stopping.
    #[arg(long, default_value_t = 20)]
    pub k: usize,

    /// Stop after this many epochs without a new best recall.
    #[arg(long, default_value_t = 50)]
    pub patience: usize,

    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Dump the discretized user-user weight matrix as a TSV edge list.
    #[arg(long)]
    pub dump_weights: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,

    /// Training TSV used to rebuild the propagation graphs and exclusions.
    #[arg(long)]
    pub train: PathBuf,

    /// Test TSV providing the relevance sets.
    #[arg(long)]
    pub test: PathBuf,

    #[arg(long, default_value_t = 20)]
    pub k: usize,

    #[command(flatten)]
    pub graph: GraphArgs,
}

#[derive(Args, Debug)]
pub struct RecommendArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,

    /// Training TSV used to rebuild the graphs and exclude seen items.
    #[arg(long)]
    pub train: PathBuf,

    /// Original user key to recommend for.
    #[arg(long)]
    pub user: String,

    #[arg(long, default_value_t = 10)]
    pub k: usize,

    #[command(flatten)]
    pub graph: GraphArgs,
}
