use std::path::PathBuf;

use anfis_core::{TrainConfig, DEFAULT_MIN_BUCKET_COUNT};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "anfis",
    version,
    about = "Wind speed forecasting with a grid-partitioned ANFIS"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average raw readings into 10-minute records.
    Resample(ResampleArgs),
    /// Fit a model on a resampled series.
    Train(TrainArgs),
    /// Write `timestamp,actual,predicted` for every admissible example.
    Predict(PredictArgs),
    /// Score a model on a series and print a one-line summary.
    Evaluate(EvaluateArgs),
    /// Generate a deterministic synthetic series.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ResampleArgs {
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long = "out", value_name = "CSV")]
    pub output: PathBuf,
    /// Minimum readings for a bucket to be emitted.
    #[arg(long, default_value_t = DEFAULT_MIN_BUCKET_COUNT)]
    pub min_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Bell,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    #[arg(long, value_name = "JSON")]
    pub model_out: PathBuf,
    #[arg(long, value_name = "JSON")]
    pub report_out: Option<PathBuf>,
    /// `16h`, `24h`, `48h`, any `<hours>h`, or a step count.
    #[arg(long, default_value = "16h")]
    pub horizon: String,
    /// Lagged wind samples per example.
    #[arg(long, default_value_t = 1)]
    pub lags: usize,
    /// Spacing between lags, in steps.
    #[arg(long, default_value_t = 1)]
    pub delta: usize,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    pub epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().tolerance)]
    pub tolerance: f64,
    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::default().step_decay)]
    pub step_decay: f64,
    /// Membership functions per input.
    #[arg(long, default_value_t = 3)]
    pub mf_count: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "JSON")]
    pub model: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    /// Also emit forecasts whose target lies past the end of the data.
    #[arg(long)]
    pub forecast_tail: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    All,
    Train,
    Test,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Train => "train",
            Subset::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "JSON")]
    pub model: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub data: PathBuf,
    /// `train`/`test` re-apply the model's chronological split to this data.
    #[arg(long, value_enum, default_value_t = Subset::All)]
    pub subset: Subset,
    #[arg(long, value_name = "JSON")]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Daily cycle, seasonal drift and AR(1) noise.
    Seasonal,
    /// Wind follows an exact linear law of the inputs `horizon_steps` earlier.
    Planted,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Seasonal)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 17_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Emit 1-minute readings instead of 10-minute records.
    #[arg(long)]
    pub raw: bool,
    /// Scatter of the 1-minute readings around each 10-minute mean.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 100)]
    pub horizon_steps: usize,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}
