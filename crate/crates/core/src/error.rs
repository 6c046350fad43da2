use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("state has zero dimension")]
    EmptyState,

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("vectors are not orthonormal: |<v{i}, v{j}> - delta| = {deviation:e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("basis has {found} vectors, expected {expected}")]
    IncompleteBasis { expected: usize, found: usize },

    #[error("eigenvalues {first} and {second} are closer than the separation threshold")]
    EigenvalueCollision { first: f64, second: f64 },

    #[error("observable is not complete: {0}")]
    NotComplete(String),

    #[error("function undefined at (a={a}, b={b})")]
    FunctionDomain { a: f64, b: f64 },

    #[error("function value {value} is within the clustering threshold of two eigenspaces")]
    AmbiguousGrouping { value: f64 },

    #[error("index {index} out of range for {len} labeled steps")]
    Index { index: usize, len: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("hypotheses are indistinguishable (total variation {tv})")]
    Indistinguishable { tv: f64 },

    #[error("outcome {label} is impossible under both hypotheses")]
    ModelMismatch { label: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
