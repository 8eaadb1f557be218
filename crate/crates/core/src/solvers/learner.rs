use serde::{Deserialize, Serialize};

use super::cd::Penalty;
use super::cv::{cross_validate, CvConfig};
use super::design::Design;
use super::{auto_grid_for, default_grid_ratio, DEFAULT_GRID_SIZE};
use crate::data::{CoefficientVector, Dataset};
use crate::error::{Error, Result};
use crate::seed::SeedStream;

/// The sparse regression procedure wrapped by the ensemble methods: a penalty
/// together with cross-validated choice of λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLearner {
    Lasso,
    ElasticNet { alpha: f64 },
    /// Lasso-initialised adaptive lasso with weights `1/|β̂_j|^τ`.
    AdaptiveLasso { tau: f64 },
}

/// Where the λ candidates come from.
#[derive(Debug, Clone, Copy)]
pub enum GridChoice<'a> {
    /// The default log grid of each (sub)problem, stopped early on saturation.
    Auto,
    /// A fixed, strictly decreasing set of levels.
    Pool(&'a [f64]),
}

/// Fit on a column subset, expressed in full-length coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFit {
    pub coefficients: CoefficientVector,
    /// `None` when the response carried no signal for any candidate column.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct DesignFit {
    pub beta: Vec<f64>,
    pub lambda: Option<f64>,
}

impl BaseLearner {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::ElasticNet { .. } => "enet",
            Self::AdaptiveLasso { .. } => "adalasso",
        }
    }

    fn cv_with(
        design: &Design,
        penalty: &Penalty,
        grid: GridChoice<'_>,
        cv: &CvConfig,
        seed: &SeedStream,
    ) -> Result<DesignFit> {
        let p = design.p();
        let (lambdas, early) = match grid {
            GridChoice::Auto => {
                let ratio = default_grid_ratio(design.n(), p);
                match auto_grid_for(design, penalty, DEFAULT_GRID_SIZE, ratio) {
                    Ok(g) => (g, true),
                    Err(Error::DegenerateGrid) => {
                        return Ok(DesignFit {
                            beta: vec![0.0; p],
                            lambda: None,
                        })
                    }
                    Err(e) => return Err(e),
                }
            }
            GridChoice::Pool(values) => (values.to_vec(), false),
        };
        let out = cross_validate(design, penalty, &lambdas, cv, seed, early)?;
        Ok(DesignFit {
            beta: out.beta,
            lambda: Some(out.lambda),
        })
    }

    pub(crate) fn fit_design(
        &self,
        design: &Design,
        grid: GridChoice<'_>,
        cv: &CvConfig,
        seed: &SeedStream,
    ) -> Result<DesignFit> {
        let p = design.p();
        match self {
            Self::Lasso => {
                let pen = Penalty {
                    l1: vec![1.0; p],
                    l2: 0.0,
                };
                Self::cv_with(design, &pen, grid, cv, seed)
            }
            Self::ElasticNet { alpha } => {
                let pen = Penalty {
                    l1: vec![*alpha; p],
                    l2: 1.0 - alpha,
                };
                Self::cv_with(design, &pen, grid, cv, seed)
            }
            Self::AdaptiveLasso { tau } => {
                let lasso = Penalty {
                    l1: vec![1.0; p],
                    l2: 0.0,
                };
                // the initial lasso always tunes over its own grid
                let init = Self::cv_with(design, &lasso, GridChoice::Auto, cv, &seed.derive(0))?;
                if init.beta.iter().all(|b| *b == 0.0) {
                    return Ok(DesignFit {
                        beta: vec![0.0; p],
                        lambda: None,
                    });
                }
                let weights = init
                    .beta
                    .iter()
                    .map(|b| {
                        if *b == 0.0 {
                            f64::INFINITY
                        } else {
                            1.0 / b.abs().powf(*tau)
                        }
                    })
                    .collect();
                let pen = Penalty {
                    l1: weights,
                    l2: 0.0,
                };
                Self::cv_with(design, &pen, grid, cv, &seed.derive(1))
            }
        }
    }

    /// Cross-validated fit on the columns `columns` of `dataset`.
    pub fn fit(
        &self,
        dataset: &Dataset,
        columns: &[usize],
        grid: GridChoice<'_>,
        cv: &CvConfig,
        seed: &SeedStream,
    ) -> Result<SubsetFit> {
        if columns.iter().any(|&j| j >= dataset.p()) {
            return Err(Error::DimensionMismatch("column index out of range".into()));
        }
        let design = Design::from_dataset(dataset, columns);
        let fit = self.fit_design(&design, grid, cv, seed)?;
        Ok(SubsetFit {
            coefficients: CoefficientVector::scatter(dataset.p(), columns, &fit.beta),
            lambda: fit.lambda,
        })
    }

    /// Cross-validated fit on every column.
    pub fn fit_all(&self, dataset: &Dataset, cv: &CvConfig, seed: &SeedStream) -> Result<SubsetFit> {
        let all: Vec<usize> = (0..dataset.p()).collect();
        self.fit(dataset, &all, GridChoice::Auto, cv, seed)
    }
}
