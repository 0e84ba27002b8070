use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamLength { expected: usize, got: usize },

    #[error("circuit has {expected} embedding slots but {got} features were supplied")]
    FeatureLength { expected: usize, got: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("gate `{0}` has no parameter-shift rule")]
    NotShiftable(String),

    #[error("exact QFIM requested for {params} parameters (limit {limit})")]
    QfimTooLarge { params: usize, limit: usize },

    #[error("circuit carries no layer tags; block-diagonal QFIM unavailable")]
    Untagged,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),

    #[error("score evaluation failed in rollout {rollout} of iteration {iteration}: {source}")]
    Rollout {
        iteration: usize,
        rollout: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite hyperparameter update at iteration {0}")]
    NonFiniteUpdate(usize),

    #[error("dataset error: {0}")]
    Data(String),

    #[error("PCA: {0}")]
    Pca(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
