//! Ordinary least squares on mean-imputed predictors.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cv::{run_cv, CVReport};
use crate::dataset::Dataset;
use crate::error::{Error, PipelineError};
use crate::math;

/// Columns whose Householder pivot falls below this fraction of their
/// original norm are treated as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub feature_names: Vec<String>,
    pub intercept: f64,
    /// Seconds per unit of each predictor.
    pub coefficients: Vec<f64>,
    /// Training means used to fill missing predictor values.
    pub column_means: Vec<f64>,
}

impl LinearModel {
    /// Least-squares fit of the target on every column of `d` plus an
    /// intercept, with missing cells replaced by the column mean.
    pub fn fit(d: &Dataset) -> Result<LinearModel, PipelineError> {
        let n = d.n_rows();
        let m = d.n_features();
        let column_means: Vec<f64> = (0..m)
            .map(|j| {
                let present: Vec<f64> = d.rows().iter().filter_map(|r| r.values[j]).collect();
                if present.is_empty() {
                    0.0
                } else {
                    present.iter().sum::<f64>() / present.len() as f64
                }
            })
            .collect();
        let mut columns = Vec::with_capacity(m + 1);
        columns.push(alloc::vec![1.0; n]);
        for (j, mean) in column_means.iter().enumerate() {
            columns.push(d.rows().iter().map(|r| r.values[j].unwrap_or(*mean)).collect());
        }
        let solution = least_squares(columns, d.targets()).map_err(|bad| PipelineError::RankDeficient {
            columns: bad.into_iter().map(|c| if c == 0 { String::from("intercept") } else { d.schema()[c - 1].name.clone() }).collect(),
        })?;
        Ok(LinearModel { feature_names: d.feature_names(), intercept: solution[0], coefficients: solution[1..].to_vec(), column_means })
    }

    /// Prediction for a row of the training schema; missing values take the
    /// training mean.
    pub fn predict(&self, values: &[Option<f64>]) -> f64 {
        self.coefficients.iter().zip(values).zip(&self.column_means).fold(self.intercept, |acc, ((c, v), mean)| acc + c * v.unwrap_or(*mean))
    }

    pub fn predict_rows(&self, d: &Dataset) -> Vec<f64> {
        d.rows().iter().map(|r| self.predict(&r.values)).collect()
    }
}

/// Householder QR solve of `min ||A x - b||` for column-major `A`. On rank
/// deficiency returns the indices of the dependent columns.
fn least_squares(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, Vec<usize>> {
    let p = a.len();
    let n = b.len();
    let norms: Vec<f64> = a.iter().map(|c| math::sqrt(c.iter().map(|v| v * v).sum())).collect();
    let mut deficient = Vec::new();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(p);
    for j in 0..p {
        if pivot_row >= n {
            deficient.push(j);
            continue;
        }
        let norm = math::sqrt(a[j][pivot_row..].iter().map(|v| v * v).sum());
        if norm <= RANK_TOLERANCE * norms[j] || norm == 0.0 {
            deficient.push(j);
            continue;
        }
        let alpha = if a[j][pivot_row] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][pivot_row..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let s: f64 = v.iter().zip(col.iter()).map(|(x, y)| x * y).sum();
            let f = 2.0 * s / vv;
            for (c, x) in col.iter_mut().zip(&v) {
                *c -= f * x;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(&mut col[pivot_row..]);
        }
        reflect(&mut b[pivot_row..]);
        pivots.push((j, pivot_row));
        pivot_row += 1;
    }
    if !deficient.is_empty() {
        return Err(deficient);
    }
    let mut x = alloc::vec![0.0; p];
    for &(j, r) in pivots.iter().rev() {
        let s: f64 = ((j + 1)..p).map(|c| a[c][r] * x[c]).sum();
        x[j] = (b[r] - s) / a[j][r];
    }
    Ok(x)
}

/// Least-squares baseline: the model fitted on all rows, and its repeated
/// k-fold scores with fold-local mean imputation. An empty feature set fits
/// the intercept only.
pub fn fit_linear_baseline(d: &Dataset, features: &[usize], k: usize, seeds: &[u64]) -> Result<(LinearModel, CVReport), Error> {
    super::cv::check_cv(d, k, seeds, features)?;
    let model = LinearModel::fit(&d.select_features(features)?)?;
    let report = run_cv(d, k, seeds, features, None, |train, test, _| Ok(LinearModel::fit(train)?.predict_rows(test)))?;
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        // [1 0; 1 1; 1 2] x = [1, 3, 5] -> x = (1, 2)
        let a = alloc::vec![alloc::vec![1.0, 1.0, 1.0], alloc::vec![0.0, 1.0, 2.0]];
        let x = least_squares(a, alloc::vec![1.0, 3.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reports_dependent_columns() {
        let a = alloc::vec![alloc::vec![1.0, 1.0, 1.0], alloc::vec![0.0, 1.0, 2.0], alloc::vec![0.0, 2.0, 4.0]];
        assert_eq!(least_squares(a, alloc::vec![1.0, 3.0, 5.0]), Err(alloc::vec![2]));
        let wide = alloc::vec![alloc::vec![1.0], alloc::vec![2.0]];
        assert_eq!(least_squares(wide, alloc::vec![1.0]), Err(alloc::vec![1]));
    }
}
