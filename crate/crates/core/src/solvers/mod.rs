//! Penalised least squares by pathwise coordinate descent.
//!
//! Every solver minimises
//!
//! ```text
//! (1/(2n)) ‖y − Xβ‖² + λ Σ_j w_j (α |β_j| + (1−α)/2 β_j²)
//! ```
//!
//! with `α = 1, w = 1` for the lasso, `w = 1` for the elastic net and `α = 1`
//! with data-driven `w_j` for the adaptive lasso. An infinite `w_j` excludes
//! variable `j`.

mod cd;
mod cv;
pub(crate) mod design;
mod learner;

use serde::{Deserialize, Serialize};

use crate::data::{CoefficientVector, Dataset};
use crate::error::{Error, Result};
use crate::seed::SeedStream;

pub use cd::soft_threshold;
pub use cv::CvConfig;
pub use learner::{BaseLearner, GridChoice, SubsetFit};

pub(crate) use cd::{walk_path, CdState, Penalty};
pub(crate) use cv::cross_validate;
pub(crate) use design::Design;

pub const DEFAULT_GRID_SIZE: usize = 100;

/// Ratio λ_min / λ_max used for automatic grids.
pub fn default_grid_ratio(n: usize, p: usize) -> f64 {
    if n > p {
        1e-3
    } else {
        1e-2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltySpec {
    Lasso,
    ElasticNet {
        alpha: f64,
    },
    AdaptiveLasso {
        weights: Vec<f64>,
        tau: f64,
    },
}

impl PenaltySpec {
    pub fn elastic_net(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "elastic net alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self::ElasticNet { alpha })
    }

    pub fn adaptive(weights: Vec<f64>, tau: f64) -> Result<Self> {
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "adaptive weights must be nonnegative".into(),
            ));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        Ok(Self::AdaptiveLasso { weights, tau })
    }

    pub(crate) fn factors(&self, p: usize) -> Result<Penalty> {
        match self {
            Self::Lasso => Ok(Penalty {
                l1: vec![1.0; p],
                l2: 0.0,
            }),
            Self::ElasticNet { alpha } => Ok(Penalty {
                l1: vec![*alpha; p],
                l2: 1.0 - alpha,
            }),
            Self::AdaptiveLasso { weights, .. } => {
                if weights.len() != p {
                    return Err(Error::DimensionMismatch(format!(
                        "{} adaptive weights for {p} columns",
                        weights.len()
                    )));
                }
                Ok(Penalty {
                    l1: weights.clone(),
                    l2: 0.0,
                })
            }
        }
    }

    /// The same penalty restricted to a subset of columns.
    pub fn restrict(&self, columns: &[usize]) -> Self {
        match self {
            Self::AdaptiveLasso { weights, tau } => Self::AdaptiveLasso {
                weights: columns.iter().map(|&j| weights[j]).collect(),
                tau: *tau,
            },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Auto,
    Explicit,
}

/// Strictly decreasing positive penalty levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    values: Vec<f64>,
    source: GridSource,
}

impl LambdaGrid {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("lambda grid is empty".into()));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "lambda values must be finite and positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "lambda grid must be strictly decreasing".into(),
            ));
        }
        Ok(Self {
            values,
            source: GridSource::Explicit,
        })
    }

    /// Sort descending and merge values within relative distance `rel_tol`.
    pub fn from_pool(mut values: Vec<f64>, rel_tol: f64) -> Result<Self> {
        values.retain(|v| *v > 0.0 && v.is_finite());
        values.sort_by(|a, b| b.total_cmp(a));
        let mut merged: Vec<f64> = Vec::with_capacity(values.len());
        for v in values {
            match merged.last() {
                Some(&last) if (last - v) <= rel_tol * last => {}
                _ => merged.push(v),
            }
        }
        Self::explicit(merged)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> GridSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.values.iter().any(|v| *v == lambda)
    }
}

/// A cross-validated fit on the full dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: CoefficientVector,
    pub lambda_selected: f64,
    pub cv_error: f64,
    pub penalty: PenaltySpec,
    /// λ values that entered the comparison and their mean held-out errors.
    pub lambdas: Vec<f64>,
    pub cv_errors: Vec<f64>,
}

pub(crate) fn log_spaced(lambda_max: f64, grid_size: usize, ratio: f64) -> Vec<f64> {
    let (hi, lo) = (lambda_max.ln(), (lambda_max * ratio).ln());
    (0..grid_size)
        .map(|k| {
            if k == 0 {
                lambda_max
            } else {
                (hi + (lo - hi) * k as f64 / (grid_size - 1) as f64).exp()
            }
        })
        .collect()
}

pub(crate) fn auto_grid_for(
    design: &Design,
    penalty: &Penalty,
    grid_size: usize,
    ratio: f64,
) -> Result<Vec<f64>> {
    let lmax = penalty
        .lambda_max(&design.xty())
        .ok_or(Error::DegenerateGrid)?;
    Ok(log_spaced(lmax, grid_size, ratio))
}

/// Log-spaced grid from λ_max down to `ratio · λ_max`.
pub fn lambda_grid_auto(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    grid_size: usize,
    ratio: f64,
) -> Result<LambdaGrid> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid_size must be at least 2".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let all: Vec<usize> = (0..dataset.p()).collect();
    let design = Design::from_dataset(dataset, &all);
    let factors = penalty.factors(dataset.p())?;
    Ok(LambdaGrid {
        values: auto_grid_for(&design, &factors, grid_size, ratio)?,
        source: GridSource::Auto,
    })
}

fn full_design(dataset: &Dataset, penalty: &PenaltySpec) -> Result<(Design, Penalty)> {
    let all: Vec<usize> = (0..dataset.p()).collect();
    Ok((
        Design::from_dataset(dataset, &all),
        penalty.factors(dataset.p())?,
    ))
}

/// Minimise the penalised objective at a single λ.
pub fn fit_at_lambda(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    lambda: f64,
    warm_start: Option<&CoefficientVector>,
) -> Result<CoefficientVector> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let (design, factors) = full_design(dataset, penalty)?;
    let mut state = CdState::new(&design, &factors);
    if let Some(w) = warm_start {
        if w.len() != dataset.p() {
            return Err(Error::DimensionMismatch("warm start length".into()));
        }
        state.set_beta(w.values());
    }
    state.solve(lambda)?;
    Ok(CoefficientVector::new(state.beta().to_vec()))
}

/// Objective values after every sweep of a single-λ solve; used to check descent.
pub fn objective_trace(dataset: &Dataset, penalty: &PenaltySpec, lambda: f64) -> Result<Vec<f64>> {
    let (design, factors) = full_design(dataset, penalty)?;
    let mut state = CdState::new(&design, &factors);
    state.trace = Some(vec![state.objective(lambda)]);
    state.solve(lambda)?;
    Ok(state.trace.take().unwrap_or_default())
}

/// One warm-started fit per grid point, largest λ first.
pub fn fit_path(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    grid: &LambdaGrid,
) -> Result<Vec<CoefficientVector>> {
    let (design, factors) = full_design(dataset, penalty)?;
    let mut out = Vec::with_capacity(grid.len());
    walk_path(&design, &factors, grid.values(), false, |_, b| {
        out.push(CoefficientVector::new(b.to_vec()))
    })?;
    Ok(out)
}

/// Choose λ from `grid` by K-fold cross-validation and refit on all rows.
///
/// Automatic grids stop early once the fit saturates (explained deviance above
/// 0.999 or stalling), the same rule the fold fits follow; explicit grids are
/// always evaluated in full.
pub fn cv_select(
    dataset: &Dataset,
    penalty: &PenaltySpec,
    grid: &LambdaGrid,
    cv: &CvConfig,
    seed: &SeedStream,
) -> Result<FitResult> {
    let (design, factors) = full_design(dataset, penalty)?;
    let early = grid.source() == GridSource::Auto;
    let out = cross_validate(&design, &factors, grid.values(), cv, seed, early)?;
    Ok(FitResult {
        coefficients: CoefficientVector::new(out.beta),
        lambda_selected: out.lambda,
        cv_error: out.cv_error,
        penalty: penalty.clone(),
        lambdas: grid.values()[..out.errors.len()].to_vec(),
        cv_errors: out.errors,
    })
}

/// `w_j = 1 / |β_j|^τ`, infinite where the initial estimate is zero.
pub fn adaptive_weights_from(initial: &CoefficientVector, tau: f64) -> Vec<f64> {
    initial
        .values()
        .iter()
        .map(|b| {
            if *b == 0.0 {
                f64::INFINITY
            } else {
                1.0 / b.abs().powf(tau)
            }
        })
        .collect()
}
