use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use strands_core::sim::{Method, MethodSettings};
use strands_core::{ClusteringMode, CvConfig, Ranking};

pub const OUTPUT_DIR_ENV: &str = "STRANDS_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "strands-out";

#[derive(Debug, Parser)]
#[command(name = "strands", version, about = "Structural randomised variable selection and its benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation scenario and write metrics tables.
    Simulate(SimulateArgs),
    /// Fit methods to a CSV dataset.
    Fit(FitArgs),
    /// Report the variable clustering of a dataset.
    ClusterReport(ClusterArgs),
    /// Step-1 versus step-2 importance table of one ensemble fit.
    Diagnostic(DiagnosticArgs),
}

/// Options shared by every command. None of them change results, so they are
/// not echoed into artifacts.
#[derive(Debug, Args)]
pub struct Runtime {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = DEFAULT_OUTPUT_DIR)]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterModeArg {
    Correlation,
    Random,
    None,
}

impl From<ClusterModeArg> for ClusteringMode {
    fn from(m: ClusterModeArg) -> Self {
        match m {
            ClusterModeArg::Correlation => ClusteringMode::Correlation,
            ClusterModeArg::Random => ClusteringMode::RandomAssign,
            ClusterModeArg::None => ClusteringMode::NoClustering,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingArg {
    Probability,
    Coefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerArg {
    Lasso,
    Adalasso,
    Enet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: strands_core::Error| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MethodArgs {
    /// Ensemble iterations B (also used by Random Lasso).
    #[arg(long, default_value_t = 300)]
    pub b: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub pi_thr: f64,
    #[arg(long, value_enum, default_value_t = ClusterModeArg::Correlation)]
    pub clustering: ClusterModeArg,
    #[arg(long, value_enum, default_value_t = RankingArg::Probability)]
    pub ranking: RankingArg,
    #[arg(long, default_value_t = 0.5)]
    pub enet_alpha: f64,
    /// Adaptive Lasso weight exponent.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Random Lasso q1 candidates; defaults to {0, .2, .4, .6, .8, 1}·p.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2_grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl MethodArgs {
    pub fn settings(&self) -> Result<MethodSettings, String> {
        let cv = CvConfig::new(self.folds).map_err(|e| e.to_string())?;
        if !(self.pi_thr > 0.0 && self.pi_thr <= 1.0) {
            return Err(format!("pi-thr must lie in (0, 1], got {}", self.pi_thr));
        }
        if !(self.rho0 > 0.0 && self.rho0 <= 1.0) {
            return Err(format!("rho0 must lie in (0, 1], got {}", self.rho0));
        }
        if self.b == 0 {
            return Err("b must be positive".into());
        }
        Ok(MethodSettings {
            iterations: self.b,
            rho0: self.rho0,
            pi_thr: self.pi_thr,
            clustering_mode: self.clustering.into(),
            ranking: match self.ranking {
                RankingArg::Probability => Ranking::ByProbability,
                RankingArg::Coefficient => Ranking::ByCoefficient,
            },
            enet_alpha: self.enet_alpha,
            tau: self.tau,
            cv,
            q1_grid: self.q1_grid.clone(),
            q2_grid: self.q2_grid.clone(),
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InputArgs {
    /// CSV with a header row; every column except the response is a predictor.
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    pub response: String,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: String,
    /// Sample size; the scenario default when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "lasso,strd-lasso")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "csv,json")]
    pub formats: Vec<Format>,
    #[command(flatten)]
    #[serde(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub runtime: Runtime,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "strd-lasso")]
    pub methods: Vec<Method>,
    /// Repeated 90/10 train/test splits for a prediction-error estimate.
    #[arg(long, value_name = "R")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_eval: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub runtime: Runtime,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClusterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = ClusterModeArg::Correlation)]
    pub mode: ClusterModeArg,
    /// Clustering JSON whose group sizes the random mode copies.
    #[arg(long, value_name = "JSON")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<PathBuf>,
    /// Base learner whose selected set seeds the correlation groups.
    #[arg(long, value_enum, default_value_t = LearnerArg::Lasso)]
    pub learner: LearnerArg,
    #[arg(long, default_value_t = 0.5)]
    pub rho0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub enet_alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub runtime: Runtime,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DiagnosticArgs {
    /// Simulated input; takes the first replicate of the scenario.
    #[arg(long, conflicts_with = "input")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Ensemble method to diagnose.
    #[arg(long, value_parser = parse_method, default_value = "strd-lasso")]
    pub method: Method,
    #[command(flatten)]
    #[serde(flatten)]
    pub settings: MethodArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub runtime: Runtime,
}
