use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Crate-level error; the `Display` prefix names the module that failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset: {0}")]
    Dataset(DatasetError),
    #[error("booster: {0}")]
    Booster(BoosterError),
    #[error("explain: {0}")]
    Explain(ExplainError),
    #[error("metrics: {0}")]
    Metrics(MetricsError),
    #[error("pipeline: {0}")]
    Pipeline(PipelineError),
}

// Written out rather than derived with `#[from]`, which would also report the
// inner error as the source and print its message twice in error chains.
macro_rules! wrap {
    ($($variant:ident($inner:ty)),*) => {$(
        impl From<$inner> for Error {
            fn from(e: $inner) -> Self {
                Error::$variant(e)
            }
        }
    )*};
}

wrap!(Dataset(DatasetError), Booster(BoosterError), Explain(ExplainError), Metrics(MetricsError), Pipeline(PipelineError));

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("variable `{0}` appears more than once in the schema")]
    DuplicateVariable(String),
    #[error("variable `{variable}` has invalid levels: {reason}")]
    InvalidLevels { variable: String, reason: String },
    #[error("header does not match schema: {0}")]
    HeaderMismatch(String),
    #[error("row {row}, column `{column}`: `{cell}` is not a number")]
    NotNumeric { row: usize, column: String, cell: String },
    #[error("row {row}, column `{column}`: {value} is not an admissible code (expected one of {levels:?})")]
    CodeOutOfRange { row: usize, column: String, value: f64, levels: Vec<i64> },
    #[error("row {row}, column `{column}`: value {value} is not finite")]
    NonFiniteValue { row: usize, column: String, value: f64 },
    #[error("row {row}: target is missing")]
    MissingTarget { row: usize },
    #[error("row {row}: target {value} must be finite and strictly positive")]
    InvalidTarget { row: usize, value: f64 },
    #[error("row {row}: expected {expected} values, found {found}")]
    Arity { row: usize, expected: usize, found: usize },
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("dataset has no rows")]
    Empty,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoosterError {
    #[error("hyperparameter {name} = {value} violates {constraint}")]
    InvalidParam { name: &'static str, value: f64, constraint: &'static str },
    #[error("hessian sum plus reg_lambda must be positive, got {0}")]
    NonPositiveDenominator(f64),
    #[error("training needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("target at row {0} is not finite")]
    NonFiniteTarget(usize),
    #[error("instance has {found} values but the model expects {expected}")]
    Arity { expected: usize, found: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplainError {
    #[error("subset enumeration supports at most {max} features, model has {m}")]
    TooManyFeatures { m: usize, max: usize },
    #[error("instance has {found} values but the model expects {expected}")]
    Arity { expected: usize, found: usize },
    #[error("dataset schema does not match the model's training schema")]
    SchemaMismatch,
    #[error("reference dataset is empty")]
    EmptyDataset,
    #[error("feature index {index} out of range for {m} features")]
    FeatureOutOfRange { index: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {y} targets vs {yhat} predictions")]
    LengthMismatch { y: usize, yhat: usize },
    #[error("empty input")]
    Empty,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("adjusted R² needs N > m + 1 (N = {n}, m = {m})")]
    TooFewSamples { n: usize, m: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("{k} folds requested for {n} rows (need 2 <= k <= rows)")]
    InvalidFolds { k: usize, n: usize },
    #[error("feature set is empty")]
    NoFeatures,
    #[error("feature index {0} out of range")]
    FeatureOutOfRange(usize),
    #[error("seed list is empty")]
    NoSeeds,
    #[error("grid axis `{0}` has no values")]
    EmptyGrid(&'static str),
    #[error("bin bounds must be strictly increasing")]
    BoundsNotIncreasing,
    #[error("design matrix is rank deficient in columns {columns:?}")]
    RankDeficient { columns: Vec<String> },
}
