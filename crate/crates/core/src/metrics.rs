//! Regression metrics: RMSE, MAE, adjusted R² and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::math;

fn check(y: &[f64], yhat: &[f64]) -> Result<(), MetricsError> {
    if y.len() != yhat.len() {
        return Err(MetricsError::LengthMismatch { y: y.len(), yhat: yhat.len() });
    }
    if y.is_empty() {
        return Err(MetricsError::Empty);
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(math::sqrt(sse / y.len() as f64))
}

pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| math::abs(a - b)).sum::<f64>() / y.len() as f64)
}

/// Both adjusted R² variants for `m` predictors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustedR2 {
    /// Uses R² = Σ(ŷ - ȳ)² / Σ(y - ȳ)² (explained over total variance).
    pub explained: f64,
    /// Uses R² = 1 - Σ(y - ŷ)² / Σ(y - ȳ)².
    pub standard: f64,
}

pub fn adj_r2(y: &[f64], yhat: &[f64], m: usize) -> Result<AdjustedR2, MetricsError> {
    check(y, yhat)?;
    let n = y.len();
    if n <= m + 1 {
        return Err(MetricsError::TooFewSamples { n, m });
    }
    let ybar = mean(y);
    let sst: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if sst == 0.0 {
        return Err(MetricsError::ZeroVariance("target"));
    }
    let ssr: f64 = yhat.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    let scale = (n - 1) as f64 / (n - m - 1) as f64;
    let adjust = |r2: f64| 1.0 - (1.0 - r2) * scale;
    Ok(AdjustedR2 { explained: adjust(ssr / sst), standard: adjust(1.0 - sse / sst) })
}

/// Pearson correlation between targets and predictions.
pub fn corr(y: &[f64], yhat: &[f64]) -> Result<f64, MetricsError> {
    check(y, yhat)?;
    let (ybar, pbar) = (mean(y), mean(yhat));
    let (mut cov, mut vy, mut vp) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(yhat) {
        let (dy, dp) = (a - ybar, b - pbar);
        cov += dp * dy;
        vy += dy * dy;
        vp += dp * dp;
    }
    if vy == 0.0 {
        return Err(MetricsError::ZeroVariance("target"));
    }
    if vp == 0.0 {
        return Err(MetricsError::ZeroVariance("prediction"));
    }
    Ok((cov / math::sqrt(vp * vy)).clamp(-1.0, 1.0))
}

/// All four metrics for one set of predictions. Fields that are undefined for
/// the input (constant targets or predictions, too few samples) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub mae: f64,
    pub adj_r2: Option<f64>,
    pub adj_r2_standard: Option<f64>,
    pub corr: Option<f64>,
    pub n: usize,
    pub m: usize,
}

impl MetricsReport {
    pub fn compute(y: &[f64], yhat: &[f64], m: usize) -> Result<Self, MetricsError> {
        let rmse = rmse(y, yhat)?;
        let mae = mae(y, yhat)?;
        let adj = adj_r2(y, yhat, m).ok();
        Ok(Self { rmse, mae, adj_r2: adj.map(|a| a.explained), adj_r2_standard: adj.map(|a| a.standard), corr: corr(y, yhat).ok(), n: y.len(), m })
    }

    /// Field-wise arithmetic mean. An optional field is `None` if it is
    /// `None` in any report. Panics on an empty slice.
    pub fn mean_of(reports: &[MetricsReport]) -> MetricsReport {
        assert!(!reports.is_empty(), "mean of no reports");
        let k = reports.len() as f64;
        let avg = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
        let avg_opt = |f: fn(&MetricsReport) -> Option<f64>| reports.iter().map(f).try_fold(0.0, |acc, v| v.map(|v| acc + v)).map(|s| s / k);
        MetricsReport {
            rmse: avg(|r| r.rmse),
            mae: avg(|r| r.mae),
            adj_r2: avg_opt(|r| r.adj_r2),
            adj_r2_standard: avg_opt(|r| r.adj_r2_standard),
            corr: avg_opt(|r| r.corr),
            n: reports[0].n,
            m: reports[0].m,
        }
    }
}
