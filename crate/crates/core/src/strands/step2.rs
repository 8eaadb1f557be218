use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::step1::ImportanceScores;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::sampling::weighted_sample_without_replacement;
use crate::seed::{stage, SeedStream};
use crate::solvers::{BaseLearner, CvConfig, GridChoice, LambdaGrid};

/// Averages over the importance-weighted sub-models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step2Output {
    pub beta_hat: Vec<f64>,
    pub pi_hat: Vec<f64>,
    /// Iterations in which each variable was sampled.
    pub sampled: Vec<usize>,
    /// Sub-model size requested, `⌈Σθ⌉`.
    pub s_tilde: usize,
    /// Sub-model size actually drawn; smaller than `s_tilde` when fewer
    /// variables carry positive weight.
    pub s_tilde_effective: usize,
    /// CV-optimal λ of every iteration.
    pub winners: Vec<Option<f64>>,
}

impl Step2Output {
    pub fn weights_degenerate(&self) -> bool {
        self.s_tilde_effective < self.s_tilde
    }
}

/// `⌈Σθ⌉`, ignoring rounding noise in the sum.
pub fn subsample_size(theta: &[f64]) -> usize {
    let total: f64 = theta.iter().sum();
    (total - 1e-9).ceil().max(0.0) as usize
}

/// Importance-weighted subsampling, each sub-model tuned over `lambda_pool` only.
pub fn step2_select(
    dataset: &Dataset,
    scores: &ImportanceScores,
    lambda_pool: &LambdaGrid,
    base_learner: &BaseLearner,
    iterations: usize,
    cv: &CvConfig,
    seed: &SeedStream,
) -> Result<Step2Output> {
    let p = dataset.p();
    if iterations == 0 {
        return Err(Error::InvalidArgument("B must be at least 1".into()));
    }
    if scores.theta.len() != p || scores.alpha_imp.len() != p {
        return Err(Error::DimensionMismatch("importance scores length".into()));
    }
    let weights: Vec<f64> = scores
        .alpha_imp
        .iter()
        .zip(&scores.theta)
        .map(|(a, t)| a * t)
        .collect();
    let s_tilde = subsample_size(&scores.theta);
    let positive = weights.iter().filter(|w| **w > 0.0).count();
    let s_eff = s_tilde.min(positive);

    let runs: Vec<(Vec<usize>, Vec<f64>, Option<f64>)> = (0..iterations)
        .into_par_iter()
        .map(|b| {
            if s_eff == 0 {
                return Ok((Vec::new(), vec![0.0; p], None));
            }
            let stream = seed.derive_path(&[stage::STEP2, b as u64]);
            let sampled = weighted_sample_without_replacement(&mut stream.rng(), &weights, s_eff);
            let fit = base_learner.fit(
                dataset,
                &sampled,
                GridChoice::Pool(lambda_pool.values()),
                cv,
                &stream.derive(0),
            )?;
            Ok((sampled, fit.coefficients.into_values(), fit.lambda))
        })
        .collect::<Result<_>>()?;

    let mut beta_sum = vec![0.0; p];
    let mut kept = vec![0usize; p];
    let mut sampled_count = vec![0usize; p];
    let mut winners = Vec::with_capacity(iterations);
    for (sampled, beta, lambda) in &runs {
        for &j in sampled {
            sampled_count[j] += 1;
            beta_sum[j] += beta[j];
            if beta[j] != 0.0 {
                kept[j] += 1;
            }
        }
        winners.push(*lambda);
    }
    let b = iterations as f64;
    Ok(Step2Output {
        beta_hat: beta_sum.iter().map(|s| s / b).collect(),
        pi_hat: kept.iter().map(|k| *k as f64 / b).collect(),
        sampled: sampled_count,
        s_tilde,
        s_tilde_effective: s_eff,
        winners,
    })
}
