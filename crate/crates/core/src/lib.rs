//! Structural randomised selection (STRANDS) for sparse linear regression,
//! the Random Lasso baseline, coordinate-descent solvers and a simulation
//! harness.
//!
//! Every random choice is drawn from a [`SeedStream`] keyed by its position in
//! the computation, so results do not depend on the number of worker threads.

pub use ndarray;

pub mod cluster;
pub mod correlation;
pub mod data;
pub mod error;
pub mod rlasso;
pub mod sampling;
pub mod seed;
pub mod sim;
pub mod solvers;
pub mod strands;

pub use cluster::{
    cluster_from_selection, correlation_cluster, no_cluster, random_cluster, Addition, Clustering,
    ClusteringMode, DEFAULT_RHO0,
};
pub use correlation::{median_abs_correlation, pearson_correlation};
pub use data::{predict, standardize, CoefficientVector, Dataset, Standardization};
pub use error::{Error, Result};
pub use rlasso::{rlasso_fit, rlasso_step1, rlasso_step2, RandomLassoConfig, RandomLassoResult};
pub use sampling::weighted_sample_without_replacement;
pub use seed::SeedStream;
pub use solvers::{
    cv_select, fit_at_lambda, fit_path, lambda_grid_auto, BaseLearner, CvConfig, FitResult, GridChoice,
    GridSource, LambdaGrid, PenaltySpec, SubsetFit,
};
pub use strands::{
    step_diagnostic, strands_fit, threshold_select, DiagnosticRow, Ranking, StrandsConfig, StrandsResult,
};
