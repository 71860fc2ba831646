//! Takeover-time regression with explainable gradient-boosted trees.
//!
//! The crate is `no_std` compatible (it needs `alloc`). It holds the
//! algorithmic pieces only; CSV/JSON file handling and the command line live
//! in the companion `takeover` crate.
//!
//! - [`schema`] and [`dataset`]: the encoded study variables, validated rows,
//!   preprocessing and summary statistics.
//! - [`synth`]: a seeded generator of stand-in data with a known target
//!   function.
//! - [`booster`]: second-order gradient boosting of regression trees with
//!   learned default directions for missing values.
//! - [`explain`]: exact Shapley attributions and pairwise interaction values
//!   for a trained ensemble, plus importance, dependence and force-plot data.
//! - [`metrics`]: RMSE, MAE, adjusted R² and Pearson correlation.
//! - [`pipeline`]: repeated k-fold cross-validation, grid search, forward
//!   feature selection, cumulative time-bin analysis and a least-squares
//!   baseline.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod booster;
pub mod dataset;
mod error;
pub mod explain;
mod math;
pub mod metrics;
mod par;
pub mod pipeline;
pub mod schema;
pub mod synth;

pub use booster::{Ensemble, Hyperparams, TreeNode};
pub use dataset::{Dataset, PreprocessOptions, Provenance, Sample, SummaryStats};
pub use error::{BoosterError, DatasetError, Error, ExplainError, MetricsError, PipelineError};
pub use schema::{VariableKind, VariableSpec};

pub type Result<T, E = Error> = core::result::Result<T, E>;
