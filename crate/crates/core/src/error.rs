use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {0} has zero variance")]
    ConstantColumn(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate lambda grid: response is orthogonal to every penalised column")]
    DegenerateGrid,

    #[error("coordinate descent did not converge within {0} sweeps")]
    NonConvergence(usize),

    #[error("every ensemble iteration drew an empty variable set")]
    EmptyEnsemble,

    #[error("bootstrap resampling kept producing constant columns after {0} attempts")]
    DegenerateBootstrap(usize),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}
