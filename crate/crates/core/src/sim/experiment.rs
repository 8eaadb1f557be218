use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mse_population, selection_metrics};
use super::scenario::{sample_dataset, SimScenario};
use crate::cluster::{ClusteringMode, DEFAULT_RHO0};
use crate::data::{CoefficientVector, Dataset};
use crate::error::{Error, Result};
use crate::rlasso::{rlasso_fit, RandomLassoConfig, RandomLassoResult};
use crate::seed::{stage, SeedStream};
use crate::solvers::{BaseLearner, CvConfig};
use crate::strands::{strands_fit, Ranking, StrandsConfig, StrandsResult};

pub const BOOTSTRAP_SE_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "enet")]
    Enet,
    #[serde(rename = "adalasso")]
    AdaLasso,
    #[serde(rename = "rlasso")]
    RLasso,
    #[serde(rename = "strd-lasso")]
    StrdLasso,
    #[serde(rename = "strd-adalasso")]
    StrdAdaLasso,
    #[serde(rename = "strd-lasso-rc")]
    StrdLassoRc,
    #[serde(rename = "strd-lasso-nc")]
    StrdLassoNc,
    #[serde(rename = "strd-adalasso-rc")]
    StrdAdaLassoRc,
    #[serde(rename = "strd-adalasso-nc")]
    StrdAdaLassoNc,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Lasso,
        Method::Enet,
        Method::AdaLasso,
        Method::RLasso,
        Method::StrdLasso,
        Method::StrdAdaLasso,
        Method::StrdLassoRc,
        Method::StrdLassoNc,
        Method::StrdAdaLassoRc,
        Method::StrdAdaLassoNc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Lasso => "lasso",
            Method::Enet => "enet",
            Method::AdaLasso => "adalasso",
            Method::RLasso => "rlasso",
            Method::StrdLasso => "strd-lasso",
            Method::StrdAdaLasso => "strd-adalasso",
            Method::StrdLassoRc => "strd-lasso-rc",
            Method::StrdLassoNc => "strd-lasso-nc",
            Method::StrdAdaLassoRc => "strd-adalasso-rc",
            Method::StrdAdaLassoNc => "strd-adalasso-nc",
        }
    }

    /// Stable stream index, independent of the order methods are requested in.
    pub fn stream_index(&self) -> u64 {
        Method::ALL.iter().position(|m| m == self).unwrap() as u64
    }

    /// Base learner and clustering mode of the ensemble variants.
    fn strands_parts(&self, settings: &MethodSettings) -> Option<(BaseLearner, ClusteringMode)> {
        let ada = BaseLearner::AdaptiveLasso { tau: settings.tau };
        Some(match self {
            Method::StrdLasso => (BaseLearner::Lasso, settings.clustering_mode),
            Method::StrdAdaLasso => (ada, settings.clustering_mode),
            Method::StrdLassoRc => (BaseLearner::Lasso, ClusteringMode::RandomAssign),
            Method::StrdLassoNc => (BaseLearner::Lasso, ClusteringMode::NoClustering),
            Method::StrdAdaLassoRc => (ada, ClusteringMode::RandomAssign),
            Method::StrdAdaLassoNc => (ada, ClusteringMode::NoClustering),
            _ => return None,
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .find(|m| m.name() == s.trim())
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Tuning shared by every method of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub iterations: usize,
    pub rho0: f64,
    pub pi_thr: f64,
    pub clustering_mode: ClusteringMode,
    pub ranking: Ranking,
    pub enet_alpha: f64,
    pub tau: f64,
    pub cv: CvConfig,
    /// Random Lasso grids; the default grids for `p` when absent.
    pub q1_grid: Option<Vec<usize>>,
    pub q2_grid: Option<Vec<usize>>,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            iterations: 300,
            rho0: DEFAULT_RHO0,
            pi_thr: 0.5,
            clustering_mode: ClusteringMode::Correlation,
            ranking: Ranking::ByProbability,
            enet_alpha: 0.5,
            tau: 1.0,
            cv: CvConfig::default(),
            q1_grid: None,
            q2_grid: None,
        }
    }
}

impl MethodSettings {
    pub fn strands_config(&self, base_learner: BaseLearner, clustering_mode: ClusteringMode) -> StrandsConfig {
        StrandsConfig {
            base_learner,
            rho0: self.rho0,
            iterations: self.iterations,
            pi_thr: self.pi_thr,
            clustering_mode,
            ranking: self.ranking,
            cv: self.cv.clone(),
        }
    }

    pub fn rlasso_config(&self, p: usize) -> RandomLassoConfig {
        let mut config = RandomLassoConfig::default_for(p);
        config.iterations = self.iterations;
        config.cv = self.cv.clone();
        if let Some(g) = &self.q1_grid {
            config.q1_grid = g.clone();
        }
        if let Some(g) = &self.q2_grid {
            config.q2_grid = g.clone();
        }
        config
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodDetail {
    Single { lambda: Option<f64> },
    Strands(Box<StrandsResult>),
    RandomLasso(Box<RandomLassoResult>),
}

/// Final model of one method, on the standardized scale of the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFit {
    pub method: Method,
    pub coefficients: CoefficientVector,
    pub selected: Vec<usize>,
    pub detail: MethodDetail,
}

pub fn fit_method(
    method: Method,
    dataset: &Dataset,
    settings: &MethodSettings,
    seed: &SeedStream,
) -> Result<MethodFit> {
    let single = |learner: BaseLearner| -> Result<MethodFit> {
        let fit = learner.fit_all(dataset, &settings.cv, seed)?;
        Ok(MethodFit {
            method,
            selected: fit.coefficients.support(),
            coefficients: fit.coefficients,
            detail: MethodDetail::Single { lambda: fit.lambda },
        })
    };
    match method {
        Method::Lasso => single(BaseLearner::Lasso),
        Method::Enet => single(BaseLearner::ElasticNet {
            alpha: settings.enet_alpha,
        }),
        Method::AdaLasso => single(BaseLearner::AdaptiveLasso { tau: settings.tau }),
        Method::RLasso => {
            let result = rlasso_fit(dataset, &settings.rlasso_config(dataset.p()), seed)?;
            Ok(MethodFit {
                method,
                selected: result.beta_hat.support(),
                coefficients: result.beta_hat.clone(),
                detail: MethodDetail::RandomLasso(Box::new(result)),
            })
        }
        _ => {
            let (learner, mode) = method.strands_parts(settings).unwrap();
            let result = strands_fit(dataset, &settings.strands_config(learner, mode), seed)?;
            Ok(MethodFit {
                method,
                selected: result.selected.clone(),
                coefficients: result.final_coefficients(),
                detail: MethodDetail::Strands(Box::new(result)),
            })
        }
    }
}

/// Metrics of one method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub method: Method,
    pub tp: Option<usize>,
    pub fp: Option<usize>,
    pub ppv: Option<f64>,
    pub mse: Option<f64>,
    pub snr: f64,
    pub selected: Vec<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: Method,
    pub mean_tp: f64,
    pub mean_fp: f64,
    /// Over the replicates that selected something.
    pub mean_ppv: Option<f64>,
    pub mean_mse: f64,
    pub se_tp: Option<f64>,
    pub se_fp: Option<f64>,
    pub se_ppv: Option<f64>,
    pub se_mse: Option<f64>,
    /// Successful replicates.
    pub replicates: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub s0: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub mean_snr: f64,
    pub rows: Vec<MethodRow>,
}

impl MetricsReport {
    pub fn row(&self, method: Method) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// One line per method; missing values are written as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,replicates,failures,mean_tp,se_tp,mean_fp,se_fp,mean_ppv,se_ppv,mean_mse,se_mse\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.method,
                r.replicates,
                r.failures,
                fmt_f64(r.mean_tp),
                fmt_opt(r.se_tp),
                fmt_f64(r.mean_fp),
                fmt_opt(r.se_fp),
                fmt_opt(r.mean_ppv),
                fmt_opt(r.se_ppv),
                fmt_f64(r.mean_mse),
                fmt_opt(r.se_mse),
            );
        }
        out
    }
}

/// 17 significant digits, enough to reproduce the value bit for bit.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NA".into()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), fmt_f64)
}

pub fn replicates_to_csv(records: &[ReplicateRecord]) -> String {
    let mut out = String::from("replicate,method,tp,fp,ppv,mse,snr,n_selected,error\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.replicate,
            r.method,
            r.tp.map_or("NA".into(), |v| v.to_string()),
            r.fp.map_or("NA".into(), |v| v.to_string()),
            fmt_opt(r.ppv),
            fmt_opt(r.mse),
            fmt_f64(r.snr),
            r.selected.len(),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }
    out
}

/// Standard deviation of 1000 bootstrap means; `None` for fewer than two values.
pub fn bootstrap_se(values: &[f64], seed: &SeedStream) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mut rng = seed.rng();
    let means: Vec<f64> = (0..BOOTSTRAP_SE_RESAMPLES)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let centre = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - centre).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    Some(var.sqrt())
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub report: MetricsReport,
    pub records: Vec<ReplicateRecord>,
}

fn replicate(
    scenario: &SimScenario,
    methods: &[Method],
    settings: &MethodSettings,
    master: &SeedStream,
    r: usize,
) -> Result<Vec<ReplicateRecord>> {
    let draw = sample_dataset(scenario, &master.derive_path(&[stage::SIM_DATA, r as u64]))?;
    let snr = draw.snr();
    let mut records = Vec::with_capacity(methods.len());
    for &method in methods {
        let seed = master.derive_path(&[stage::SIM_METHOD, r as u64, method.stream_index()]);
        let record = match fit_method(method, &draw.dataset, settings, &seed) {
            Ok(fit) => {
                let sel = selection_metrics(&fit.selected, &draw.truth, scenario.p)?;
                let original = draw.dataset.meta().to_original_scale(&fit.coefficients);
                let mse = mse_population(&original, &draw.beta_true, &scenario.covariance)?;
                ReplicateRecord {
                    replicate: r,
                    method,
                    tp: Some(sel.tp),
                    fp: Some(sel.fp),
                    ppv: sel.ppv,
                    mse: Some(mse),
                    snr,
                    selected: fit.selected,
                    error: None,
                }
            }
            Err(e) => ReplicateRecord {
                replicate: r,
                method,
                tp: None,
                fp: None,
                ppv: None,
                mse: None,
                snr,
                selected: Vec::new(),
                error: Some(e.to_string()),
            },
        };
        records.push(record);
    }
    Ok(records)
}

/// Fresh dataset per replicate, every method fitted on the same draw, then
/// means and bootstrap standard errors per method.
pub fn run_experiment(
    scenario: &SimScenario,
    methods: &[Method],
    replicates: usize,
    settings: &MethodSettings,
    master_seed: u64,
) -> Result<Experiment> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("at least one replicate is required".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    let master = SeedStream::new(master_seed);
    let per_rep: Vec<Vec<ReplicateRecord>> = (0..replicates)
        .into_par_iter()
        .map(|r| replicate(scenario, methods, settings, &master, r))
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();

    let snrs: Vec<f64> = records
        .iter()
        .step_by(methods.len())
        .map(|r| r.snr)
        .collect();
    let rows = methods
        .iter()
        .map(|&method| {
            let ok: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.method == method && r.error.is_none())
                .collect();
            let tp: Vec<f64> = ok.iter().map(|r| r.tp.unwrap() as f64).collect();
            let fp: Vec<f64> = ok.iter().map(|r| r.fp.unwrap() as f64).collect();
            let ppv: Vec<f64> = ok.iter().filter_map(|r| r.ppv).collect();
            let mse: Vec<f64> = ok.iter().map(|r| r.mse.unwrap()).collect();
            let se = |values: &[f64], k: u64| {
                bootstrap_se(values, &master.derive_path(&[stage::SIM_BOOTSTRAP_SE, method.stream_index(), k]))
            };
            MethodRow {
                method,
                mean_tp: mean(&tp),
                mean_fp: mean(&fp),
                mean_ppv: (!ppv.is_empty()).then(|| mean(&ppv)),
                mean_mse: mean(&mse),
                se_tp: se(&tp, 0),
                se_fp: se(&fp, 1),
                se_ppv: se(&ppv, 2),
                se_mse: se(&mse, 3),
                replicates: ok.len(),
                failures: replicates - ok.len(),
            }
        })
        .collect();

    Ok(Experiment {
        report: MetricsReport {
            scenario: scenario.name.clone(),
            n: scenario.n,
            p: scenario.p,
            s0: scenario.s0(),
            replicates,
            master_seed,
            mean_snr: mean(&snrs),
            rows,
        },
        records,
    })
}
