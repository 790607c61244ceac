#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `mixprim` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage and validation errors, 3 for
//! numerical failures.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "mixprim",
    version,
    about = "Encode, analyze and synthesize trajectories with basis functions and Gaussian mixtures"
)]
pub struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Only report errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Print a one-line JSON status report on stderr.
    #[arg(long, global = true)]
    pub diagnostics: bool,

    /// Default output path (stdout when absent). A subcommand's own
    /// `--out` takes precedence.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gaussian mixture models.
    #[command(subcommand)]
    Gmm(GmmCmd),
    /// Gaussian mixture regression.
    #[command(subcommand)]
    Gmr(GmrCmd),
    /// Locally weighted regression.
    #[command(subcommand)]
    Lwr(LwrCmd),
    /// Bézier curves.
    #[command(subcommand)]
    Bezier(BezierCmd),
    /// Fourier series of mirrored mixtures.
    #[command(subcommand)]
    Fourier(FourierCmd),
    /// Spectral multiscale coverage.
    #[command(subcommand)]
    Ergodic(ErgodicCmd),
    /// Probabilistic movement primitives.
    #[command(subcommand)]
    Promp(PrompCmd),
    /// Synthetic demonstrations.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// SVG figures.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GmmCmd {
    /// Fit a mixture with EM. Trajectory CSVs are fitted on (t, x) rows;
    /// any other numeric CSV on its rows as they are.
    Fit(GmmFitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    TimeBinning,
    Kmeans,
}

#[derive(Debug, Args)]
pub struct GmmFitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, short)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Init::TimeBinning)]
    pub init: Init,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum GmrCmd {
    /// Condition a saved mixture on input dimensions.
    Predict(GmrPredictArgs),
}

#[derive(Debug, Args)]
pub struct GmrPredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Input dimensions, comma separated.
    #[arg(long = "in", value_delimiter = ',', required = true)]
    pub input: Vec<usize>,
    /// Output dimensions, comma separated.
    #[arg(long = "out", value_delimiter = ',', required = true)]
    pub output: Vec<usize>,
    /// CSV of query points, one column per input dimension.
    #[arg(long, conflicts_with = "grid")]
    pub query: Option<PathBuf>,
    /// Evenly spaced 1-D queries `lo,hi,n`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub grid: Option<Vec<f64>>,
    /// Output path (stdout when absent).
    #[arg(long = "output")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LwrCmd {
    /// Fit x(t) from a trajectory CSV with K RBFs uniform over the time span.
    Fit(LwrFitArgs),
    /// Evaluate a saved model.
    Predict(LwrPredictArgs),
}

#[derive(Debug, Args)]
pub struct LwrFitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, short)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// RBF variance; defaults to (span/K)².
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Use raw rather than rescaled activations.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct LwrPredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, conflicts_with = "grid")]
    pub query: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum BezierCmd {
    /// Sample a curve at evenly spaced parameters.
    Eval(BezierEvalArgs),
    /// Least-squares fit to one trajectory.
    Fit(BezierFitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    DeCasteljau,
    Direct,
}

#[derive(Debug, Args)]
pub struct BezierEvalArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Method::DeCasteljau)]
    pub method: Method,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BezierFitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub degree: usize,
    /// Trajectory id to fit (default: the first).
    #[arg(long)]
    pub traj_id: Option<u64>,
    /// Pin the end control points to the end samples.
    #[arg(long)]
    pub clamp_ends: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum FourierCmd {
    /// Analytic cosine-series coefficients of a saved mixture.
    Coeffs(FourierCoeffsArgs),
}

#[derive(Debug, Args)]
pub struct FourierCoeffsArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Period L; the mixture should live in [0, L/2]^D.
    #[arg(long)]
    pub period: f64,
    /// Coefficients per dimension.
    #[arg(long, short)]
    pub k: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum ErgodicCmd {
    /// Closed-loop coverage of a target mixture.
    Simulate(ErgodicSimulateArgs),
}

#[derive(Debug, Args)]
pub struct ErgodicSimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Trajectory CSV `step,x1..xD,epsilon`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Coefficients of the final time-averaged trajectory.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Coefficients of the target.
    #[arg(long)]
    pub target_coeffs: Option<PathBuf>,
    /// SVG of the path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PrompCmd {
    /// Fit a ProMP to demonstrations.
    Fit(PrompFitArgs),
    /// Draw trajectories.
    Sample(PrompSampleArgs),
    /// Condition on via-points.
    Condition(PrompConditionArgs),
    /// Fit a mixture of ProMPs.
    Mixture(PrompMixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Radial,
    Bernstein,
    Fourier,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, value_enum, default_value_t = Family::Radial)]
    pub family: Family,
    /// Basis functions per dimension.
    #[arg(long, short)]
    pub k: usize,
    /// Resample demonstrations to this many steps (default: first demo's length).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PrompFitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct PrompSampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, short, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct PrompConditionArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `t_index:dim=value@noise`, repeatable.
    #[arg(long, required = true)]
    pub via: Vec<String>,
    /// Write the mean trajectory as CSV instead of the conditioned model.
    #[arg(long)]
    pub mean: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct PrompMixtureArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Number of ProMPs.
    #[arg(long, short)]
    pub j: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Generate a trajectory CSV.
    Gen(DatasetGenArgs),
}

#[derive(Debug, Args)]
pub struct DatasetGenArgs {
    /// sine, spiral or handwriting-like-loops.
    #[arg(long, default_value = "sine")]
    pub shape: String,
    /// Number of demonstrations.
    #[arg(long = "demos", short = 'm', default_value_t = 5)]
    pub demos: usize,
    /// Samples per demonstration.
    #[arg(long = "steps", short = 't', default_value_t = 100)]
    pub steps: usize,
    /// Dimension.
    #[arg(long = "dim", short = 'd', default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Trajectory,
    CoeffHeatmap,
    BasisFunctions,
    CovarianceMatrix,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Trajectory CSV, coefficient CSV, or model JSON depending on the kind.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Basis family when no model is given (basis-functions).
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, short)]
    pub k: Option<usize>,
    /// Mixture component to draw (covariance-matrix of a GMM).
    #[arg(long, default_value_t = 0)]
    pub component: usize,
    /// Draw Σ^w instead of the trajectory covariance (covariance-matrix of a ProMP).
    #[arg(long)]
    pub weight_space: bool,
    #[command(flatten)]
    pub out: OutArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    match commands::run(&cli) {
        Ok(details) => {
            if cli.diagnostics {
                let report = serde_json::json!({ "status": "ok", "exit_code": 0, "details": details });
                eprintln!("{report}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code: u8 = if e.is_numerical() { 3 } else { 2 };
            if cli.diagnostics {
                let report = serde_json::json!({
                    "status": "error",
                    "exit_code": code,
                    "kind": if code == 3 { "numerical" } else { "validation" },
                    "message": e.to_string(),
                });
                eprintln!("{report}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}
