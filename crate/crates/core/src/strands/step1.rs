use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::{stage, SeedStream};
use crate::solvers::{BaseLearner, CvConfig, GridChoice};

/// Per-variable evidence gathered while exploring random sub-models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceScores {
    /// Number of iterations in which the variable was sampled.
    pub m: Vec<usize>,
    /// Mean |β| over the iterations that sampled the variable.
    pub alpha_imp: Vec<f64>,
    /// Fraction of those iterations that kept the variable.
    pub theta: Vec<f64>,
}

/// Draw, independently from every group, a subset whose size is uniform on
/// `0..=|G_k|`, and return their union (sorted).
pub fn draw_structured_subset<R: Rng + ?Sized>(clustering: &Clustering, rng: &mut R) -> Vec<usize> {
    let mut subset = Vec::new();
    for group in &clustering.groups {
        let size = rng.random_range(0..=group.len());
        if size == 0 {
            continue;
        }
        for pos in index::sample(rng, group.len(), size) {
            subset.push(group[pos]);
        }
    }
    subset.sort_unstable();
    subset
}

struct Iteration {
    sampled: Vec<usize>,
    beta: Vec<f64>,
    lambda: Option<f64>,
}

/// Uniform structured subsampling with one cross-validated fit per draw.
///
/// Returns the importance scores and the CV-optimal λ of every iteration that
/// fitted something. Iterations that draw an empty set are skipped.
pub fn step1_explore(
    dataset: &Dataset,
    clustering: &Clustering,
    base_learner: &BaseLearner,
    iterations: usize,
    cv: &CvConfig,
    seed: &SeedStream,
) -> Result<(ImportanceScores, Vec<f64>)> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("B must be at least 1".into()));
    }
    let p = dataset.p();
    clustering.validate(p)?;

    let runs: Vec<Option<Iteration>> = (0..iterations)
        .into_par_iter()
        .map(|b| {
            let stream = seed.derive_path(&[stage::STEP1, b as u64]);
            let sampled = draw_structured_subset(clustering, &mut stream.rng());
            if sampled.is_empty() {
                return Ok(None);
            }
            let fit = base_learner.fit(dataset, &sampled, GridChoice::Auto, cv, &stream.derive(0))?;
            Ok(Some(Iteration {
                sampled,
                beta: fit.coefficients.into_values(),
                lambda: fit.lambda,
            }))
        })
        .collect::<Result<_>>()?;

    let mut m = vec![0usize; p];
    let mut abs_sum = vec![0.0; p];
    let mut kept = vec![0usize; p];
    let mut lambdas = Vec::new();
    let mut fitted = 0usize;
    for run in runs.iter().flatten() {
        fitted += 1;
        for &j in &run.sampled {
            m[j] += 1;
            let b = run.beta[j];
            abs_sum[j] += b.abs();
            if b != 0.0 {
                kept[j] += 1;
            }
        }
        lambdas.extend(run.lambda);
    }
    if fitted == 0 {
        return Err(Error::EmptyEnsemble);
    }

    let per_sample = |total: f64, j: usize| if m[j] == 0 { 0.0 } else { total / m[j] as f64 };
    let alpha_imp = (0..p).map(|j| per_sample(abs_sum[j], j)).collect();
    let theta = (0..p).map(|j| per_sample(kept[j] as f64, j)).collect();
    Ok((ImportanceScores { m, alpha_imp, theta }, lambdas))
}
