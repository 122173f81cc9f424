//! Command-line surface. Every tunable is `Option` so a config file can fill
//! the gaps: flag > config file > built-in default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ddos-elm",
    version,
    about = "Train and run an Extreme Learning Machine that flags attack traffic in network-flow records"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one configuration and evaluate it on the held-out split.
    Train(TrainArgs),
    /// Cross-validated grid search, refit of the winner, held-out evaluation.
    Grid(GridArgs),
    /// Evaluate a stored model on a labeled CSV.
    Evaluate(EvaluateArgs),
    /// Score line-delimited records from a file or stdin, one verdict per line.
    Score(ScoreArgs),
    /// Write a synthetic labeled flow CSV.
    Synth(SynthArgs),
}

/// Input and preprocessing flags shared by `train` and `grid`.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Labeled flow CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the model artifact.
    #[arg(long)]
    pub model: PathBuf,
    /// Where to write the key=value evaluation report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Column holding the traffic category [default: Label].
    #[arg(long)]
    pub label_column: Option<String>,
    /// Category meaning benign, case-insensitive; anything else is attack [default: Benign].
    #[arg(long)]
    pub benign_value: Option<String>,
    /// Field delimiter, one ASCII character or a tab [default: ,].
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Columns to ignore, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Columns to one-hot encode, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Minimum |Pearson r| with the label for a feature to be kept [default: 0.02].
    #[arg(long)]
    pub corr_threshold: Option<f64>,
    /// Share of each class used for training [default: 0.8].
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Seed for the split, folds and weight initialization [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Decision threshold on raw scores [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Fit feature selection on training rows only.
    #[arg(long)]
    pub leak_free: bool,
    /// Unstratified train/test split.
    #[arg(long)]
    pub plain_split: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Hidden-layer width [default: 64].
    #[arg(long)]
    pub hidden: Option<usize>,
    /// tanh, sigmoid or rbf [default: tanh].
    #[arg(long)]
    pub activation: Option<String>,
    /// RBF kernel width [default: 1.0].
    #[arg(long)]
    pub rbf_gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Hidden widths to try, comma separated [default: 16,32,64,128,256,512,1024].
    #[arg(long, value_delimiter = ',')]
    pub hidden: Vec<usize>,
    /// Activations to try, comma separated [default: tanh,sigmoid,rbf].
    #[arg(long, value_delimiter = ',')]
    pub activation: Vec<String>,
    /// RBF widths to try, comma separated [default: 1.0].
    #[arg(long, value_delimiter = ',')]
    pub rbf_gamma: Vec<f64>,
    /// Cross-validation folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Selection metric: f1 or accuracy [default: f1].
    #[arg(long)]
    pub metric: Option<String>,
    /// Write the full-precision leaderboard as CSV.
    #[arg(long)]
    pub leaderboard: Option<PathBuf>,
    /// Evaluate configurations one at a time.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labeled CSV with the model's input columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Model artifact written by train or grid.
    #[arg(long)]
    pub model: PathBuf,
    /// Where to write the key=value evaluation report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write one `ordinal,score,label` line per scored record.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// TOML file with a default threshold.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Decision threshold on raw scores [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Model artifact written by train or grid.
    #[arg(long)]
    pub model: PathBuf,
    /// Records to score; stdin when absent or `-`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Verdict destination; stdout when absent or `-`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML file with a default threshold.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Decision threshold on raw scores [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Benign rows [default: 2000].
    #[arg(long)]
    pub benign: Option<usize>,
    /// Attack rows [default: 2000].
    #[arg(long)]
    pub attack: Option<usize>,
    /// Feature columns; beyond the 12 designed ones extra columns are noise [default: 12].
    #[arg(long)]
    pub n_features: Option<usize>,
    /// Attack family weights, e.g. `ddos=0.5,recon=0.5` [default: ddos=0.3,dos=0.25,recon=0.15,mqtt=0.2,spoofing=0.1].
    #[arg(long)]
    pub mix: Option<String>,
    /// Generator seed [default: 7].
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with defaults for these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}
