use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::covariance::CovarianceSpec;
use crate::data::{predict, standardize, CoefficientVector, Dataset, Standardization};
use crate::error::{Error, Result};
use crate::seed::{stage, SeedStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub tp: usize,
    pub fp: usize,
    /// `None` when nothing was selected.
    pub ppv: Option<f64>,
}

pub fn selection_metrics(selected: &[usize], truth: &[usize], p: usize) -> Result<SelectionMetrics> {
    let mut is_true = vec![false; p];
    for &j in truth {
        *is_true
            .get_mut(j)
            .ok_or_else(|| Error::DimensionMismatch(format!("truth index {j} ≥ p = {p}")))? = true;
    }
    let mut seen = vec![false; p];
    let (mut tp, mut fp) = (0, 0);
    for &j in selected {
        if j >= p {
            return Err(Error::DimensionMismatch(format!("selected index {j} ≥ p = {p}")));
        }
        if std::mem::replace(&mut seen[j], true) {
            continue;
        }
        if is_true[j] {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    let ppv = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    Ok(SelectionMetrics { tp, fp, ppv })
}

/// `(β̂ − β)ᵀ V (β̂ − β)` against the population covariance.
pub fn mse_population(beta_hat: &[f64], beta_true: &[f64], covariance: &CovarianceSpec) -> Result<f64> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::DimensionMismatch("coefficient lengths differ".into()));
    }
    let d: Vec<f64> = beta_hat.iter().zip(beta_true).map(|(a, b)| a - b).collect();
    covariance.quad_form(&d)
}

/// `‖y_test − ŷ‖² / n_test`, predictions made on the original scale of the training data.
pub fn prediction_error(
    y_test: ArrayView1<'_, f64>,
    x_test_raw: ArrayView2<'_, f64>,
    meta: &Standardization,
    coefficients: &CoefficientVector,
) -> Result<f64> {
    if y_test.len() != x_test_raw.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} responses for {} test rows",
            y_test.len(),
            x_test_raw.nrows()
        )));
    }
    if y_test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let pred = predict(meta, coefficients, x_test_raw)?;
    let sse: f64 = y_test.iter().zip(pred.iter()).map(|(y, f)| (y - f) * (y - f)).sum();
    Ok(sse / y_test.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvalReport {
    pub errors: Vec<f64>,
    pub n_test: usize,
    pub mean: f64,
    /// Bootstrap standard error of the mean; `None` for a single repeat.
    pub se: Option<f64>,
}

pub const SPLIT_TRAIN_FRACTION: f64 = 0.9;

/// Repeated random 90/10 splits: standardize the training rows, fit, and score
/// the held-out rows on the original scale.
pub fn split_eval<F>(
    raw_x: ArrayView2<'_, f64>,
    raw_y: ArrayView1<'_, f64>,
    repeats: usize,
    seed: &SeedStream,
    mut fit: F,
) -> Result<SplitEvalReport>
where
    F: FnMut(&Dataset, &SeedStream) -> Result<CoefficientVector>,
{
    let n = raw_x.nrows();
    if raw_y.len() != n {
        return Err(Error::DimensionMismatch("x and y row counts differ".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("at least one split is required".into()));
    }
    let n_test = ((n as f64 * (1.0 - SPLIT_TRAIN_FRACTION)).round() as usize).max(1);
    if n - n_test < 2 {
        return Err(Error::InvalidArgument(format!("{n} rows are too few to split")));
    }
    let mut errors = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let stream = seed.derive_path(&[stage::SPLIT_EVAL, r as u64]);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream.rng());
        let (test, train) = order.split_at(n_test);
        let train_ds = standardize(
            raw_x.select(Axis(0), train).view(),
            raw_y.select(Axis(0), train).view(),
        )?;
        let coefs = fit(&train_ds, &stream.derive(0))?;
        errors.push(prediction_error(
            raw_y.select(Axis(0), test).view(),
            raw_x.select(Axis(0), test).view(),
            train_ds.meta(),
            &coefs,
        )?);
    }
    let mean = errors.iter().sum::<f64>() / repeats as f64;
    let se = super::experiment::bootstrap_se(&errors, &seed.derive(stage::SIM_BOOTSTRAP_SE));
    Ok(SplitEvalReport {
        errors,
        n_test,
        mean,
        se,
    })
}
