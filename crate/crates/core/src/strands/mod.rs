//! Structural randomised selection.
//!
//! Three stages wrap a base learner:
//!
//! 0. fit the base learner on all data and group variables by correlation,
//!    seeded from its selected set;
//! 1. repeatedly draw a uniform-size subset from every group, fit, and record
//!    how often (`θ_j`) and how strongly (`α_j`) each variable is kept;
//! 2. repeatedly draw `⌈Σθ⌉` variables with probability `∝ α_j θ_j`, fit with
//!    λ restricted to the levels that won stages 0 and 1, and average.
//!
//! The final model keeps the `ŝ0 = #{π̂_j ≥ π_thr}` top-ranked variables.

mod step1;
mod step2;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_from_selection, no_cluster, random_cluster, Clustering, ClusteringMode};
use crate::data::{CoefficientVector, Dataset};
use crate::error::{Error, Result};
use crate::seed::{stage, SeedStream};
use crate::solvers::{BaseLearner, CvConfig, LambdaGrid};

pub use step1::{draw_structured_subset, step1_explore, ImportanceScores};
pub use step2::{step2_select, subsample_size, Step2Output};

/// Relative tolerance for merging λ values in the stage-2 pool.
pub const POOL_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    ByProbability,
    ByCoefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrandsConfig {
    pub base_learner: BaseLearner,
    pub rho0: f64,
    pub iterations: usize,
    pub pi_thr: f64,
    pub clustering_mode: ClusteringMode,
    pub ranking: Ranking,
    pub cv: CvConfig,
}

impl Default for StrandsConfig {
    fn default() -> Self {
        Self {
            base_learner: BaseLearner::Lasso,
            rho0: 0.5,
            iterations: 300,
            pi_thr: 0.5,
            clustering_mode: ClusteringMode::Correlation,
            ranking: Ranking::ByProbability,
            cv: CvConfig::default(),
        }
    }
}

impl StrandsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("B must be at least 1".into()));
        }
        if !(self.rho0 > 0.0 && self.rho0 <= 1.0) {
            return Err(Error::InvalidArgument(format!("rho0 must lie in (0, 1], got {}", self.rho0)));
        }
        if !(self.pi_thr > 0.0 && self.pi_thr < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "pi_thr must lie in (0, 1), got {}",
                self.pi_thr
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrandsResult {
    pub beta_hat: CoefficientVector,
    pub pi_hat: Vec<f64>,
    pub s0_hat: usize,
    pub selected: Vec<usize>,
    pub step1: ImportanceScores,
    pub lambda_pool: Vec<f64>,
    pub clustering: Clustering,
    pub s_tilde: usize,
    pub s_tilde_effective: usize,
    pub config: StrandsConfig,
}

impl StrandsResult {
    /// Averaged coefficients restricted to the selected variables.
    pub fn final_coefficients(&self) -> CoefficientVector {
        self.beta_hat.restricted_to(&self.selected)
    }

    pub fn records(&self) -> Vec<VariableRecord> {
        (0..self.pi_hat.len())
            .map(|j| VariableRecord {
                j,
                m: self.step1.m[j],
                alpha: self.step1.alpha_imp[j],
                theta: self.step1.theta[j],
                beta_hat: self.beta_hat.values()[j],
                pi_hat: self.pi_hat[j],
                selected: self.selected.binary_search(&j).is_ok(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub j: usize,
    pub m: usize,
    pub alpha: f64,
    pub theta: f64,
    pub beta_hat: f64,
    pub pi_hat: f64,
    pub selected: bool,
}

/// `ŝ0 = #{π̂_j ≥ π_thr}`, then the `ŝ0` top-ranked variables (lower index wins ties).
/// The selection is returned in ascending index order.
pub fn threshold_select(
    beta_hat: &[f64],
    pi_hat: &[f64],
    pi_thr: f64,
    ranking: Ranking,
) -> Result<(usize, Vec<usize>)> {
    if beta_hat.len() != pi_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients and {} probabilities",
            beta_hat.len(),
            pi_hat.len()
        )));
    }
    let s0 = pi_hat.iter().filter(|v| **v >= pi_thr).count();
    let key: Vec<f64> = match ranking {
        Ranking::ByProbability => pi_hat.to_vec(),
        Ranking::ByCoefficient => beta_hat.iter().map(|b| b.abs()).collect(),
    };
    let mut order: Vec<usize> = (0..key.len()).collect();
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));
    let mut selected = order[..s0].to_vec();
    selected.sort_unstable();
    Ok((s0, selected))
}

/// Step 0 clustering for the configured mode, given the full-data selection.
fn clustering_for(
    dataset: &Dataset,
    config: &StrandsConfig,
    selected: &[usize],
    seed: &SeedStream,
) -> Result<Clustering> {
    let mut clustering = match config.clustering_mode {
        ClusteringMode::NoClustering => no_cluster(dataset.p()),
        ClusteringMode::Correlation => cluster_from_selection(dataset, selected, config.rho0)?.0,
        ClusteringMode::RandomAssign => {
            let template = cluster_from_selection(dataset, selected, config.rho0)?.0;
            random_cluster(&template, &seed.derive(stage::RANDOM_CLUSTER))
        }
    };
    clustering.rho0 = config.rho0;
    Ok(clustering)
}

/// Run all stages.
pub fn strands_fit(dataset: &Dataset, config: &StrandsConfig, seed: &SeedStream) -> Result<StrandsResult> {
    config.validate()?;
    let p = dataset.p();
    let learner = &config.base_learner;

    let full = learner.fit_all(dataset, &config.cv, &seed.derive(stage::STEP0))?;
    let clustering = clustering_for(dataset, config, &full.coefficients.support(), seed)?;

    let (scores, step1_lambdas) =
        step1_explore(dataset, &clustering, learner, config.iterations, &config.cv, seed)?;

    let mut pool_values: Vec<f64> = full.lambda.into_iter().collect();
    pool_values.extend(step1_lambdas);

    let (beta_hat, pi_hat, lambda_pool, s_tilde, s_eff) = if pool_values.is_empty() {
        // nothing was ever fitted with a finite λ: no evidence for any variable
        (vec![0.0; p], vec![0.0; p], Vec::new(), subsample_size(&scores.theta), 0)
    } else {
        let pool = LambdaGrid::from_pool(pool_values, POOL_MERGE_TOL)?;
        let out = step2_select(dataset, &scores, &pool, learner, config.iterations, &config.cv, seed)?;
        (
            out.beta_hat,
            out.pi_hat,
            pool.values().to_vec(),
            out.s_tilde,
            out.s_tilde_effective,
        )
    };

    let (s0_hat, selected) = threshold_select(&beta_hat, &pi_hat, config.pi_thr, config.ranking)?;
    Ok(StrandsResult {
        beta_hat: CoefficientVector::new(beta_hat),
        pi_hat,
        s0_hat,
        selected,
        step1: scores,
        lambda_pool,
        clustering,
        s_tilde,
        s_tilde_effective: s_eff,
        config: config.clone(),
    })
}

/// One row per variable comparing the stage-1 and stage-2 importance scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub j: usize,
    pub theta: f64,
    pub pi_hat: f64,
    pub alpha: f64,
    pub abs_beta: f64,
    pub relevant: Option<bool>,
}

pub fn step_diagnostic(result: &StrandsResult, relevant: Option<&[usize]>) -> Vec<DiagnosticRow> {
    (0..result.pi_hat.len())
        .map(|j| DiagnosticRow {
            j,
            theta: result.step1.theta[j],
            pi_hat: result.pi_hat[j],
            alpha: result.step1.alpha_imp[j],
            abs_beta: result.beta_hat.values()[j].abs(),
            relevant: relevant.map(|r| r.contains(&j)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_by_probability() {
        let (s0, sel) = threshold_select(&[0.0; 3], &[0.9, 0.4, 0.6], 0.5, Ranking::ByProbability).unwrap();
        assert_eq!(s0, 2);
        assert_eq!(sel, vec![0, 2]);
    }

    #[test]
    fn nothing_above_threshold() {
        let (s0, sel) = threshold_select(&[1.0, 2.0], &[0.1, 0.49], 0.5, Ranking::ByProbability).unwrap();
        assert_eq!(s0, 0);
        assert!(sel.is_empty());
    }

    #[test]
    fn threshold_by_coefficient() {
        let (s0, sel) =
            threshold_select(&[0.1, -2.0, 3.0], &[0.6, 0.6, 0.2], 0.5, Ranking::ByCoefficient).unwrap();
        assert_eq!(s0, 2);
        assert_eq!(sel, vec![1, 2]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let (_, sel) =
            threshold_select(&[0.0; 4], &[0.5, 0.7, 0.7, 0.2], 0.6, Ranking::ByProbability).unwrap();
        assert_eq!(sel, vec![1, 2]);
        let (_, sel) =
            threshold_select(&[1.0, 1.0, 1.0, 0.0], &[0.9, 0.9, 0.1, 0.0], 0.5, Ranking::ByCoefficient)
                .unwrap();
        assert_eq!(sel, vec![0, 1]);
    }

    #[test]
    fn threshold_rejects_mismatch() {
        assert!(threshold_select(&[0.0], &[0.1, 0.2], 0.5, Ranking::ByProbability).is_err());
    }

    #[test]
    fn subsample_size_ignores_rounding() {
        assert_eq!(subsample_size(&[1.0 / 3.0, 2.0 / 3.0]), 1);
        assert_eq!(subsample_size(&[0.5, 0.6]), 2);
        assert_eq!(subsample_size(&[0.0, 0.0]), 0);
    }

    #[test]
    fn config_validation() {
        let mut c = StrandsConfig::default();
        assert!(c.validate().is_ok());
        c.pi_thr = 1.0;
        assert!(c.validate().is_err());
        c.pi_thr = 0.5;
        c.iterations = 0;
        assert!(c.validate().is_err());
    }
}
