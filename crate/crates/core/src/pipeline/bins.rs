use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cv::cross_validate;
use crate::booster::Hyperparams;
use crate::dataset::Dataset;
use crate::error::{Error, PipelineError};
use crate::metrics::MetricsReport;

/// Scores for the rows whose target is at most `upper_bound`. Skipped bins
/// carry a `warning` and no metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub upper_bound: f64,
    pub sample_count: usize,
    pub metrics: Option<MetricsReport>,
    /// Smallest per-seed MAE.
    pub min_mae: Option<f64>,
    /// Largest per-seed MAE.
    pub max_mae: Option<f64>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub rows: Vec<BinRow>,
}

/// Cross-validates the booster on cumulative target bins `target <= bound`.
pub fn bin_analysis(d: &Dataset, p: &Hyperparams, k: usize, seeds: &[u64], features: &[usize], bounds: &[f64]) -> Result<BinReport, Error> {
    if bounds.windows(2).any(|w| !(w[0] < w[1])) || bounds.iter().any(|b| b.is_nan()) {
        return Err(PipelineError::BoundsNotIncreasing.into());
    }
    let mut rows = Vec::with_capacity(bounds.len());
    for &bound in bounds {
        let subset = d.filter_rows(|r| r.target <= bound);
        let count = subset.n_rows();
        if count < k {
            rows.push(BinRow {
                upper_bound: bound,
                sample_count: count,
                metrics: None,
                min_mae: None,
                max_mae: None,
                warning: Some(format!("skipped: {count} rows for {k} folds")),
            });
            continue;
        }
        let report = cross_validate(&subset, p, k, seeds, features)?;
        rows.push(BinRow {
            upper_bound: bound,
            sample_count: count,
            metrics: Some(report.mean),
            min_mae: Some(report.min_mae),
            max_mae: Some(report.max_mae),
            warning: None,
        });
    }
    Ok(BinReport { rows })
}
