use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CVReport};
use crate::booster::Hyperparams;
use crate::dataset::Dataset;
use crate::error::{Error, PipelineError};

/// Candidate values for the five searched hyperparameters. Fields not
/// searched are taken from `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperGrid {
    pub n_estimators: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub max_depth: Vec<usize>,
    pub subsample: Vec<f64>,
    pub colsample_bytree: Vec<f64>,
    pub base: Hyperparams,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            n_estimators: alloc::vec![50, 100, 200],
            learning_rate: alloc::vec![0.05, 0.1, 0.3],
            max_depth: alloc::vec![2, 3, 4, 6],
            subsample: alloc::vec![0.8, 1.0],
            colsample_bytree: alloc::vec![0.8, 1.0],
            base: Hyperparams::default(),
        }
    }
}

impl HyperGrid {
    /// A grid holding exactly `p`.
    pub fn single(p: Hyperparams) -> Self {
        Self {
            n_estimators: alloc::vec![p.n_estimators],
            learning_rate: alloc::vec![p.learning_rate],
            max_depth: alloc::vec![p.max_depth],
            subsample: alloc::vec![p.subsample],
            colsample_bytree: alloc::vec![p.colsample_bytree],
            base: p,
        }
    }

    /// Cartesian product in declaration order, `n_estimators` outermost.
    pub fn points(&self) -> Result<Vec<Hyperparams>, PipelineError> {
        for (name, len) in [
            ("n_estimators", self.n_estimators.len()),
            ("learning_rate", self.learning_rate.len()),
            ("max_depth", self.max_depth.len()),
            ("subsample", self.subsample.len()),
            ("colsample_bytree", self.colsample_bytree.len()),
        ] {
            if len == 0 {
                return Err(PipelineError::EmptyGrid(name));
            }
        }
        let mut out = Vec::new();
        for &n_estimators in &self.n_estimators {
            for &learning_rate in &self.learning_rate {
                for &max_depth in &self.max_depth {
                    for &subsample in &self.subsample {
                        for &colsample_bytree in &self.colsample_bytree {
                            out.push(Hyperparams { n_estimators, learning_rate, max_depth, subsample, colsample_bytree, ..self.base });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: Hyperparams,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best: Hyperparams,
    pub report: CVReport,
    /// Every evaluated configuration in grid order.
    pub evaluated: Vec<GridPoint>,
}

/// Exhaustive search minimizing mean cross-validated RMSE. Ties go to fewer
/// trees, then shallower trees, then the earlier grid point.
pub fn grid_search(d: &Dataset, grid: &HyperGrid, k: usize, seeds: &[u64], features: &[usize]) -> Result<GridSearch, Error> {
    let points = grid.points()?;
    let mut evaluated = Vec::with_capacity(points.len());
    let mut best: Option<(Hyperparams, CVReport)> = None;
    for p in points {
        let report = cross_validate(d, &p, k, seeds, features)?;
        evaluated.push(GridPoint { params: p, mean_rmse: report.mean.rmse });
        let better = match &best {
            None => true,
            Some((b, r)) => {
                let (x, y) = (report.mean.rmse, r.mean.rmse);
                x < y || (x == y && (p.n_estimators, p.max_depth) < (b.n_estimators, b.max_depth))
            }
        };
        if better {
            best = Some((p, report));
        }
    }
    let (best, report) = best.expect("grid has at least one point");
    Ok(GridSearch { best, report, evaluated })
}
