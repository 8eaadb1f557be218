//! Simulation designs, accuracy metrics and replicated experiments.

mod covariance;
mod experiment;
mod metrics;
mod scenario;

pub use covariance::{CovarianceKind, CovarianceSpec};
pub use experiment::{
    bootstrap_se, fit_method, fmt_f64, replicates_to_csv, run_experiment, Experiment, Method, MethodDetail,
    MethodFit, MethodRow, MethodSettings, MetricsReport, ReplicateRecord, BOOTSTRAP_SE_RESAMPLES,
};
pub use metrics::{
    mse_population, prediction_error, selection_metrics, split_eval, SelectionMetrics, SplitEvalReport,
    SPLIT_TRAIN_FRACTION,
};
pub use scenario::{
    build_scenario, build_scenario_with_n, sample_dataset, snr, SignalPlacement, SimDraw, SimScenario,
    SCENARIO_NAMES,
};
