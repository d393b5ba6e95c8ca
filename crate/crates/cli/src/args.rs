use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thermolens::{EnergyModel, FitMethod};

#[derive(Debug, Parser)]
#[command(
    name = "thermolens",
    version,
    about = "Entropy and energy metrics for contribution collections"
)]
pub struct Cli {
    /// Worker threads for per-month and per-page computation (default: all cores).
    #[arg(long, global = true, env = "THERMOLENS_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

/// Everything except `--threads` is recorded in the output header.
#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Thermodynamic metrics of one `value,count` collection.
    Metrics(MetricsArgs),
    /// Fit a discrete power law and run the KS test.
    Fit(FitArgs),
    /// Draw a seeded power-law sample as a `value,count` collection.
    Synth(SynthArgs),
    /// Theoretical metric curves over an exponent grid.
    Curves(CurvesArgs),
    /// Solve the constrained maximum-entropy problem and report residuals.
    VerifyTheorem(VerifyArgs),
    /// Monthly evolution series from an edit-event log.
    Evolve(EvolveArgs),
    /// Per-page metrics with saturation and power-law flags.
    Pages(PagesArgs),
    /// Correlate per-page metrics with readership.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Log,
    Linear,
}

impl From<Model> for EnergyModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Log => EnergyModel::Logarithmic,
            Model::Linear => EnergyModel::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Discrete,
    Continuous,
}

impl From<Method> for FitMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Discrete => FitMethod::Discrete,
            Method::Continuous => FitMethod::Continuous,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(short, long, env = "THERMOLENS_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    /// Collection CSV with header `value,count`.
    #[arg(short, long, env = "THERMOLENS_INPUT")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "log", env = "THERMOLENS_MODEL")]
    pub model: Model,
    #[arg(long, value_enum, default_value = "csv", env = "THERMOLENS_FORMAT")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Collection CSV with header `value,count`.
    #[arg(short, long, env = "THERMOLENS_INPUT")]
    pub input: PathBuf,
    /// Largest KS distance still classified as a power law.
    #[arg(long, default_value_t = 0.1, env = "THERMOLENS_KS_THRESHOLD")]
    pub ks_threshold: f64,
    #[arg(
        long,
        value_enum,
        default_value = "discrete",
        env = "THERMOLENS_METHOD"
    )]
    pub method: Method,
    #[arg(long, value_enum, default_value = "json", env = "THERMOLENS_FORMAT")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Power-law exponent, must exceed 1.
    #[arg(long, env = "THERMOLENS_ALPHA")]
    pub alpha: f64,
    /// Number of individuals to draw.
    #[arg(long, env = "THERMOLENS_N", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, env = "THERMOLENS_SEED")]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long, env = "THERMOLENS_ALPHA_MIN")]
    pub alpha_min: f64,
    #[arg(long, env = "THERMOLENS_ALPHA_MAX")]
    pub alpha_max: f64,
    #[arg(long, env = "THERMOLENS_STEP")]
    pub step: f64,
    /// Truncate the law to `1..=N` and emit S, Q, R as well. Without it only
    /// the untruncated E and A are written.
    #[arg(long, env = "THERMOLENS_TRUNCATION")]
    pub truncation: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "log", env = "THERMOLENS_MODEL")]
    pub model: Model,
    /// Largest value V of the support `1..=V`.
    #[arg(long, default_value_t = 10_000, env = "THERMOLENS_SUPPORT_MAX")]
    pub support_max: u64,
    /// Target average energy.
    #[arg(long, default_value_t = 1.0, env = "THERMOLENS_ENERGY")]
    pub energy: f64,
    /// Pass threshold for the residuals.
    #[arg(long, default_value_t = 1e-6, env = "THERMOLENS_TOL")]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EventArgs {
    /// Edit log CSV with header `ts,editor,page`.
    #[arg(short, long, env = "THERMOLENS_EVENTS")]
    pub events: PathBuf,
    /// Fail on the first malformed line instead of skipping it.
    #[arg(long, env = "THERMOLENS_STRICT")]
    pub strict: bool,
    #[arg(long, default_value_t = 0.1, env = "THERMOLENS_KS_THRESHOLD")]
    pub ks_threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: EventArgs,
    #[arg(long, value_enum, default_value = "log", env = "THERMOLENS_MODEL")]
    pub model: Model,
    /// Also write per-month class populations and masses here.
    #[arg(long, env = "THERMOLENS_CLASSES_OUT")]
    pub classes_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PagesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: EventArgs,
    /// End of the observation horizon in epoch seconds (default: last event).
    #[arg(long, env = "THERMOLENS_HORIZON")]
    pub horizon: Option<i64>,
    #[arg(long, default_value_t = 4500, env = "THERMOLENS_MIN_EDITS")]
    pub min_edits: u64,
    #[arg(long, default_value_t = 0.10, env = "THERMOLENS_TAIL_FRAC")]
    pub tail_frac: f64,
    #[arg(long, default_value_t = 0.05, env = "THERMOLENS_GROWTH_FRAC")]
    pub growth_frac: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelateArgs {
    /// Per-page metrics CSV written by `pages`.
    #[arg(long, env = "THERMOLENS_PAGES")]
    pub pages: PathBuf,
    /// Readership CSV with header `page,clicks`.
    #[arg(long, env = "THERMOLENS_READERSHIP")]
    pub readership: PathBuf,
    /// Keep only pages flagged as saturated.
    #[arg(long, env = "THERMOLENS_SATURATED_ONLY")]
    pub saturated_only: bool,
    #[arg(long, env = "THERMOLENS_STRICT")]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}
