use std::path::PathBuf;

use bregman_tweedie::dataset::{LabelColumn, LabelMap};
use bregman_tweedie::{BranchChoice, LossMode, Rational, ReportFormat};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "btclass", version, about = "Bregman-Tweedie losses and linear classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CSV of loss value and margin gradient over a margin grid.
    LossTable(LossTableArgs),
    /// CSV of the Bregman divergence D(x | y) over a grid of x.
    DivergenceTable(DivergenceTableArgs),
    /// Categories and domains associated with an alpha.
    DomainInfo(DomainInfoArgs),
    /// Fit a classifier and write the model.
    Train(TrainArgs),
    /// Predict labels of a CSV with a saved model.
    Predict(PredictArgs),
    /// Cross-validation table over a lambda grid.
    Cv(CvArgs),
    /// Multi-dataset, multi-method benchmark.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Bregman-Tweedie loss
    Bt,
    /// Higher-order hinge max(0, c^(1-a) - (1-a) m)^(1/(1-a))
    Hinge,
}

#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Loss family.
    #[arg(long, value_enum, default_value = "bt")]
    pub family: Family,
    /// alpha as p/q.
    #[arg(long, allow_hyphen_values = true, default_value = "84/85")]
    pub alpha: Rational,
    /// Sub-model: h (c_alpha = -1), l (c = 1) or custom (needs --c).
    /// Defaults to l, or custom when --c is given.
    #[arg(long)]
    pub mode: Option<LossMode>,
    /// Scale c > 0.
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LossTableArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    pub m_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    pub m_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 61)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Psi,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Positive,
    Negative,
}

impl From<BranchArg> for BranchChoice {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Positive => BranchChoice::Positive,
            BranchArg::Negative => BranchChoice::Negative,
        }
    }
}

#[derive(Debug, Args)]
pub struct DivergenceTableArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Rational,
    /// Generating function.
    #[arg(long, value_enum, default_value = "psi")]
    pub base: BaseArg,
    /// Half-line used where the domain offers two.
    #[arg(long, value_enum, default_value = "positive")]
    pub branch: BranchArg,
    /// Reference point y (interior of the domain).
    #[arg(long, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.1)]
    pub x_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 30)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DomainInfoArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Rational,
}

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    /// Label column: "last", a 0-based index, or a header name.
    #[arg(long, default_value = "last")]
    pub label_col: LabelColumn,
    /// First CSV row is a header.
    #[arg(long)]
    pub has_header: bool,
    /// Explicit label mapping such as "M:+1,B:-1".
    #[arg(long)]
    pub label_map: Option<LabelMap>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimArgs {
    /// Box multiplier rho in (1, 2).
    #[arg(long, default_value_t = 1.5)]
    pub rho: f64,
    /// Projected-gradient tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CvFlags {
    #[arg(long, default_value_t = 4)]
    pub folds: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated lambdas; entries may be written 2^b.
    /// Defaults to 2^-14, ..., 2^5.
    #[arg(long)]
    pub lambda_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Fixed lambda; without it lambda is chosen by cross-validation.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub cv: CvFlags,
    #[command(flatten)]
    pub optim: OptimArgs,
    /// Model file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labelled CSV in the training layout.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub cv: CvFlags,
    #[command(flatten)]
    pub optim: OptimArgs,
    #[arg(long, default_value = "csv")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Lines of `name,train.csv,test.csv[,label_col[,has_header]]`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub folds: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replaces the lambda grid of every method.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    #[command(flatten)]
    pub optim: OptimArgs,
    #[arg(long, default_value = "csv")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
