//! Random Lasso: bootstrap rows, subsample variables, average lasso fits.
//!
//! Step 1 draws `q1` variables uniformly per bootstrap and turns the averaged
//! coefficients into importances `I_j = |mean β̃_j|`. Step 2 draws `q2`
//! variables with probability proportional to `I_j`; the averaged coefficients
//! are thresholded at `1/n`. Each bootstrap sample is re-standardized before
//! fitting and its coefficients are mapped back to the full-data scale.

use ndarray::Axis;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{predict, standardize, CoefficientVector, Dataset};
use crate::error::{Error, Result};
use crate::sampling::weighted_sample_without_replacement;
use crate::seed::{stage, SeedStream};
use crate::solvers::{BaseLearner, CvConfig, Design, GridChoice};

const MAX_BOOTSTRAP_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomLassoConfig {
    pub iterations: usize,
    pub q1_grid: Vec<usize>,
    pub q2_grid: Vec<usize>,
    pub cv: CvConfig,
}

impl RandomLassoConfig {
    /// `B = 300` and the grids `{0, .2p, .4p, .6p, .8p, p}` (rounded, 0 → 1).
    pub fn default_for(p: usize) -> Self {
        let grid = default_q_grid(p);
        Self {
            iterations: 300,
            q1_grid: grid.clone(),
            q2_grid: grid,
            cv: CvConfig::default(),
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("B must be at least 1".into()));
        }
        if self.q1_grid.is_empty() || self.q2_grid.is_empty() {
            return Err(Error::InvalidArgument("q grids must be nonempty".into()));
        }
        if let Some(q) = self
            .q1_grid
            .iter()
            .chain(&self.q2_grid)
            .find(|q| **q < 1 || **q > p)
        {
            return Err(Error::InvalidArgument(format!("q = {q} outside 1..={p}")));
        }
        Ok(())
    }
}

pub fn default_q_grid(p: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        .iter()
        .map(|f| ((f * p as f64).round() as usize).clamp(1, p))
        .collect();
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomLassoResult {
    pub importance: Vec<f64>,
    pub beta_hat: CoefficientVector,
    pub beta_raw: Vec<f64>,
    pub q1_selected: usize,
    pub q2_selected: usize,
    pub threshold: f64,
    /// Held-out error of every `(q1, q2)` pair tried, empty when no search ran.
    pub search: Vec<QSearchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSearchPoint {
    pub q1: usize,
    pub q2: usize,
    pub cv_error: f64,
}

/// Fit a cross-validated lasso on a bootstrap of `dataset` restricted to `columns`;
/// coefficients come back on the full-data standardized scale, in column order.
fn bootstrap_fit<R: Rng>(
    dataset: &Dataset,
    rng: &mut R,
    mut choose_columns: impl FnMut(&mut R) -> Vec<usize>,
    cv: &CvConfig,
    seed: &SeedStream,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = dataset.n();
    for _ in 0..MAX_BOOTSTRAP_ATTEMPTS {
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let columns = choose_columns(rng);
        let Some((design, sds)) = Design::resampled_standardized(dataset, &rows, &columns) else {
            continue;
        };
        let fit = BaseLearner::Lasso.fit_design(&design, GridChoice::Auto, cv, seed)?;
        let beta = fit.beta.iter().zip(&sds).map(|(b, s)| b / s).collect();
        return Ok((columns, beta));
    }
    Err(Error::DegenerateBootstrap(MAX_BOOTSTRAP_ATTEMPTS))
}

fn sum_fits(p: usize, fits: &[(Vec<usize>, Vec<f64>)]) -> Vec<f64> {
    let mut total = vec![0.0; p];
    for (columns, beta) in fits {
        for (&j, b) in columns.iter().zip(beta) {
            total[j] += b;
        }
    }
    total
}

/// Importance `I_j = |Σ_b β̃_j^(b)| / B` from uniformly drawn `q1`-subsets.
pub fn rlasso_step1(
    dataset: &Dataset,
    q1: usize,
    iterations: usize,
    cv: &CvConfig,
    seed: &SeedStream,
) -> Result<Vec<f64>> {
    let p = dataset.p();
    if q1 < 1 || q1 > p {
        return Err(Error::InvalidArgument(format!("q1 = {q1} outside 1..={p}")));
    }
    let fits: Vec<_> = (0..iterations)
        .into_par_iter()
        .map(|b| {
            let stream = seed.derive_path(&[stage::RLASSO_STEP1, b as u64]);
            let mut rng = stream.rng();
            bootstrap_fit(
                dataset,
                &mut rng,
                |r| {
                    let mut c = index::sample(r, p, q1).into_vec();
                    c.sort_unstable();
                    c
                },
                cv,
                &stream.derive(0),
            )
        })
        .collect::<Result<_>>()?;
    let b = iterations as f64;
    Ok(sum_fits(p, &fits).iter().map(|s| (s / b).abs()).collect())
}

/// Averaged coefficients from `q2`-subsets drawn with probability `∝ I_j`.
pub fn rlasso_step2(
    dataset: &Dataset,
    importance: &[f64],
    q2: usize,
    iterations: usize,
    cv: &CvConfig,
    seed: &SeedStream,
) -> Result<Vec<f64>> {
    let p = dataset.p();
    if importance.len() != p {
        return Err(Error::DimensionMismatch("importance length".into()));
    }
    if q2 < 1 || q2 > p {
        return Err(Error::InvalidArgument(format!("q2 = {q2} outside 1..={p}")));
    }
    if !importance.iter().any(|v| *v > 0.0) {
        return Err(Error::InvalidArgument("every importance is zero".into()));
    }
    let fits: Vec<_> = (0..iterations)
        .into_par_iter()
        .map(|b| {
            let stream = seed.derive_path(&[stage::RLASSO_STEP2, b as u64]);
            let mut rng = stream.rng();
            bootstrap_fit(
                dataset,
                &mut rng,
                |r| weighted_sample_without_replacement(r, importance, q2),
                cv,
                &stream.derive(0),
            )
        })
        .collect::<Result<_>>()?;
    let b = iterations as f64;
    Ok(sum_fits(p, &fits).iter().map(|s| s / b).collect())
}

/// Both steps; all-zero importances short-circuit to a zero estimate.
fn pipeline(
    dataset: &Dataset,
    q1: usize,
    q2: usize,
    config: &RandomLassoConfig,
    seed: &SeedStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let importance = rlasso_step1(dataset, q1, config.iterations, &config.cv, seed)?;
    let beta_raw = if importance.iter().any(|v| *v > 0.0) {
        rlasso_step2(dataset, &importance, q2, config.iterations, &config.cv, seed)?
    } else {
        vec![0.0; dataset.p()]
    };
    Ok((importance, beta_raw))
}

/// Keep coefficients with `|β| ≥ threshold`.
pub fn apply_threshold(beta_raw: &[f64], threshold: f64) -> CoefficientVector {
    CoefficientVector::new(
        beta_raw
            .iter()
            .map(|b| if b.abs() >= threshold { *b } else { 0.0 })
            .collect(),
    )
}

/// Held-out squared error of the un-thresholded pipeline for every `(q1, q2)`.
fn search_q(dataset: &Dataset, config: &RandomLassoConfig, seed: &SeedStream) -> Result<Vec<QSearchPoint>> {
    let n = dataset.n();
    let search_seed = seed.derive(stage::RLASSO_QSEARCH);
    let labels = config.cv.fold_assignment(n, &search_seed);
    let x = dataset.x();
    let y = dataset.y();
    let mut sse = vec![0.0; config.q1_grid.len() * config.q2_grid.len()];

    for fold in 0..config.cv.folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i] != fold);
        let train_ds = standardize(
            x.select(Axis(0), &train).view(),
            y.select(Axis(0), &train).view(),
        )?;
        let x_test = x.select(Axis(0), &test);
        let fold_seed = search_seed.derive(fold as u64);
        for (a, &q1) in config.q1_grid.iter().enumerate() {
            let q1_seed = fold_seed.derive(q1 as u64);
            let importance = rlasso_step1(&train_ds, q1, config.iterations, &config.cv, &q1_seed)?;
            for (c, &q2) in config.q2_grid.iter().enumerate() {
                let beta_raw = if importance.iter().any(|v| *v > 0.0) {
                    rlasso_step2(
                        &train_ds,
                        &importance,
                        q2,
                        config.iterations,
                        &config.cv,
                        &q1_seed.derive(q2 as u64),
                    )?
                } else {
                    vec![0.0; dataset.p()]
                };
                let pred = predict(train_ds.meta(), &CoefficientVector::new(beta_raw), x_test.view())?;
                sse[a * config.q2_grid.len() + c] += test
                    .iter()
                    .zip(pred.iter())
                    .map(|(&i, v)| (y[i] - v) * (y[i] - v))
                    .sum::<f64>();
            }
        }
    }

    let mut points = Vec::with_capacity(sse.len());
    for (a, &q1) in config.q1_grid.iter().enumerate() {
        for (c, &q2) in config.q2_grid.iter().enumerate() {
            points.push(QSearchPoint {
                q1,
                q2,
                cv_error: sse[a * config.q2_grid.len() + c] / n as f64,
            });
        }
    }
    Ok(points)
}

/// Tune `(q1, q2)` by cross-validation (when either grid has more than one
/// entry), rerun on all rows and threshold at `1/n`.
pub fn rlasso_fit(dataset: &Dataset, config: &RandomLassoConfig, seed: &SeedStream) -> Result<RandomLassoResult> {
    config.validate(dataset.p())?;
    let (q1, q2, search) = if config.q1_grid.len() == 1 && config.q2_grid.len() == 1 {
        (config.q1_grid[0], config.q2_grid[0], Vec::new())
    } else {
        let points = search_q(dataset, config, seed)?;
        let mut best = 0;
        for (k, pt) in points.iter().enumerate() {
            if pt.cv_error < points[best].cv_error {
                best = k;
            }
        }
        (points[best].q1, points[best].q2, points)
    };
    let (importance, beta_raw) = pipeline(dataset, q1, q2, config, seed)?;
    let threshold = 1.0 / dataset.n() as f64;
    Ok(RandomLassoResult {
        importance,
        beta_hat: apply_threshold(&beta_raw, threshold),
        beta_raw,
        q1_selected: q1,
        q2_selected: q2,
        threshold,
        search,
    })
}
