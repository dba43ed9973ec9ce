use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative exponent {0} is not defined in the real semiring")]
    NegativeExponentInRealSemiring(i32),

    #[error("cannot parse word {text:?} at byte {pos}: {msg}")]
    Parse {
        text: String,
        pos: usize,
        msg: String,
    },

    #[error("dimension {dim} out of range for a {d}-dimensional series")]
    DimensionOutOfRange { dim: usize, d: usize },

    #[error("exponent of dimension {0} merges to zero")]
    ZeroExponent(usize),

    #[error("unsupported ISS combination: {0}")]
    UnsupportedSpec(String),

    #[error("invalid weighting: {0}")]
    InvalidWeighting(String),

    #[error("brute-force oracle too large (p = {p}, T = {len}; limits p <= 6, T <= 64)")]
    OracleTooLarge { p: usize, len: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("expected a univariate series, got {0} dimensions")]
    NotUnivariate(usize),

    #[error("quantile pool is empty")]
    EmptyPool,

    #[error("invalid sieve {0:?}")]
    InvalidSieve(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("only one class present in the training labels")]
    SingleClass,

    #[error("feature matrix has no rows or no columns")]
    EmptyFeatures,

    #[error("shape mismatch: expected {expected} columns, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}: dataset is empty")]
    EmptyDataset(PathBuf),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
