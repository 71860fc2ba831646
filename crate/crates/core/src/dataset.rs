//! Validated takeover-time rows, preprocessing and summary statistics.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::DatasetError;
use crate::math;
use crate::schema::{self, VariableSpec, TBTB, TBTC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Paper,
    Synthetic,
    User,
}

/// One observation: a value slot per schema variable (`None` = missing) and
/// the takeover time in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<Option<f64>>,
    pub target: f64,
}

impl Sample {
    pub fn new(values: Vec<Option<f64>>, target: f64) -> Self {
        Self { values, target }
    }
}

/// An immutable, validated table of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<VariableSpec>,
    rows: Vec<Sample>,
    provenance: Provenance,
}

impl Dataset {
    /// Validates the schema and every row. Row numbers in errors are 1-based.
    pub fn new(schema: Vec<VariableSpec>, rows: Vec<Sample>, provenance: Provenance) -> Result<Self, DatasetError> {
        schema::validate_schema(&schema)?;
        for (i, row) in rows.iter().enumerate() {
            check_row(&schema, row, i + 1)?;
        }
        Ok(Self { schema, rows, provenance })
    }

    pub fn schema(&self) -> &[VariableSpec] {
        &self.schema
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        schema::names(&self.schema)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        schema::index_of(&self.schema, name)
    }

    /// Resolves variable names to schema positions.
    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, DatasetError> {
        names.iter().map(|n| self.feature_index(n.as_ref()).ok_or_else(|| DatasetError::UnknownVariable(n.as_ref().into()))).collect()
    }

    pub fn fingerprint(&self) -> String {
        schema::fingerprint(&self.schema)
    }

    pub fn missing_cells(&self) -> usize {
        self.rows.iter().map(|r| r.values.iter().filter(|v| v.is_none()).count()).sum()
    }

    /// Projection onto the given columns, in the given order.
    pub fn select_features(&self, features: &[usize]) -> Result<Dataset, DatasetError> {
        let mut schema = Vec::with_capacity(features.len());
        for &f in features {
            let spec = self.schema.get(f).ok_or_else(|| DatasetError::UnknownVariable(alloc::format!("#{f}")))?;
            schema.push(spec.clone());
        }
        schema::validate_schema(&schema)?;
        let rows = self.rows.iter().map(|r| Sample::new(features.iter().map(|&f| r.values[f]).collect(), r.target)).collect();
        Ok(Dataset { schema, rows, provenance: self.provenance })
    }

    /// Rows at the given positions, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset { schema: self.schema.clone(), rows: rows.iter().map(|&i| self.rows[i].clone()).collect(), provenance: self.provenance }
    }

    pub fn filter_rows(&self, mut keep: impl FnMut(&Sample) -> bool) -> Dataset {
        Dataset { schema: self.schema.clone(), rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(), provenance: self.provenance }
    }
}

fn check_row(schema: &[VariableSpec], row: &Sample, line: usize) -> Result<(), DatasetError> {
    if row.values.len() != schema.len() {
        return Err(DatasetError::Arity { row: line, expected: schema.len(), found: row.values.len() });
    }
    for (spec, value) in schema.iter().zip(&row.values) {
        let Some(v) = *value else { continue };
        if !v.is_finite() {
            return Err(DatasetError::NonFiniteValue { row: line, column: spec.name.clone(), value: v });
        }
        if !spec.admits(v) {
            return Err(DatasetError::CodeOutOfRange { row: line, column: spec.name.clone(), value: v, levels: spec.levels.clone() });
        }
    }
    if !(row.target.is_finite() && row.target > 0.0) {
        return Err(DatasetError::InvalidTarget { row: line, value: row.target });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Replace `TBTC` and `TBTB` with one `TBTC&TBTB` column.
    pub merge_time_budgets: bool,
    /// Rows whose target exceeds this many seconds are dropped.
    pub outlier_threshold: f64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self { merge_time_budgets: true, outlier_threshold: 9.0 }
    }
}

/// Merges the time-budget columns and drops outlying targets.
///
/// The merged value is `TBTC` when present, otherwise `TBTB`. The merged
/// column takes the position of whichever source column comes first. The
/// operation is idempotent.
pub fn preprocess(d: &Dataset, opts: &PreprocessOptions) -> Result<Dataset, DatasetError> {
    let mut schema = d.schema.clone();
    let mut rows: Vec<Sample> = d.rows.iter().filter(|r| r.target <= opts.outlier_threshold).cloned().collect();

    if opts.merge_time_budgets {
        let tbtc = schema::index_of(&schema, TBTC);
        let tbtb = schema::index_of(&schema, TBTB);
        let first = match (tbtc, tbtb) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if let Some(at) = first {
            let drop = match (tbtc, tbtb) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
            schema[at] = schema::merged_time_budget();
            for row in &mut rows {
                let merged = tbtc.and_then(|i| row.values[i]).or_else(|| tbtb.and_then(|i| row.values[i]));
                row.values[at] = merged;
                if let Some(k) = drop {
                    row.values.remove(k);
                }
            }
            if let Some(k) = drop {
                schema.remove(k);
            }
        }
    }
    Dataset::new(schema, rows, d.provenance)
}

/// Row count, missingness and the 1-second target histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub row_count: usize,
    pub missing_fraction: f64,
    pub target_min: f64,
    pub target_max: f64,
    pub target_mean: f64,
    /// `histogram[b]` counts targets in `[b, b + 1)` seconds.
    pub histogram: Vec<usize>,
}

pub fn summarize(d: &Dataset) -> Result<SummaryStats, DatasetError> {
    if d.is_empty() {
        return Err(DatasetError::Empty);
    }
    let targets = d.targets();
    let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let mut histogram = alloc::vec![0usize; math::floor(max) as usize + 1];
    for &t in &targets {
        histogram[math::floor(t) as usize] += 1;
    }
    let cells = d.n_rows() * d.n_features();
    let missing_fraction = if cells == 0 { 0.0 } else { d.missing_cells() as f64 / cells as f64 };
    Ok(SummaryStats { row_count: d.n_rows(), missing_fraction, target_min: min, target_max: max, target_mean: mean, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{merged_schema, study_schema, TIME_BUDGET};
    use alloc::vec;

    fn five() -> Vec<VariableSpec> {
        vec![
            VariableSpec::continuous("AGE", "years"),
            VariableSpec::binary("HAND", ""),
            VariableSpec::continuous(TBTC, "s"),
            VariableSpec::continuous(TBTB, "s"),
            VariableSpec::ordinal("URG", 0, 2, ""),
        ]
    }

    #[test]
    fn rejects_bad_code_with_position() {
        let err = Dataset::new(five(), vec![Sample::new(vec![Some(41.0), Some(1.0), None, None, Some(5.0)], 3.2)], Provenance::User).unwrap_err();
        match err {
            DatasetError::CodeOutOfRange { row, column, levels, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "URG");
                assert_eq!(levels, vec![0, 1, 2]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_target_and_arity() {
        let bad = Dataset::new(five(), vec![Sample::new(vec![None; 5], 0.0)], Provenance::User);
        assert!(matches!(bad, Err(DatasetError::InvalidTarget { row: 1, .. })));
        let short = Dataset::new(five(), vec![Sample::new(vec![None; 4], 1.0)], Provenance::User);
        assert!(matches!(short, Err(DatasetError::Arity { expected: 5, found: 4, .. })));
    }

    #[test]
    fn merge_prefers_tbtc_and_filters_outliers() {
        let rows = vec![
            Sample::new(vec![Some(30.0), Some(0.0), Some(7.0), None, Some(2.0)], 1.5),
            Sample::new(vec![Some(30.0), Some(0.0), None, Some(12.0), Some(1.0)], 2.5),
            Sample::new(vec![Some(30.0), Some(0.0), Some(4.0), Some(20.0), Some(2.0)], 0.9),
            Sample::new(vec![None, None, None, None, None], 19.79),
        ];
        let d = Dataset::new(five(), rows, Provenance::User).unwrap();
        let p = preprocess(&d, &PreprocessOptions::default()).unwrap();
        assert_eq!(p.n_rows(), 3);
        assert_eq!(p.feature_names(), vec!["AGE", "HAND", TIME_BUDGET, "URG"]);
        let merged: Vec<_> = p.rows().iter().map(|r| r.values[2]).collect();
        assert_eq!(merged, vec![Some(7.0), Some(12.0), Some(4.0)]);
        assert_eq!(preprocess(&p, &PreprocessOptions::default()).unwrap(), p);
    }

    #[test]
    fn infinite_threshold_keeps_everything() {
        let d = Dataset::new(five(), vec![Sample::new(vec![None; 5], 19.79)], Provenance::User).unwrap();
        let opts = PreprocessOptions { merge_time_budgets: false, outlier_threshold: f64::INFINITY };
        assert_eq!(preprocess(&d, &opts).unwrap(), d);
    }

    #[test]
    fn merge_on_study_schema_yields_merged_schema() {
        let d = Dataset::new(study_schema(), vec![Sample::new(vec![None; 18], 1.0)], Provenance::User).unwrap();
        let p = preprocess(&d, &PreprocessOptions::default()).unwrap();
        assert_eq!(p.schema(), merged_schema().as_slice());
    }

    #[test]
    fn summary_counts_missing_cells() {
        let rows = vec![
            Sample::new(vec![None, Some(1.0), Some(3.0), Some(2.0), Some(0.0)], 0.5),
            Sample::new(vec![Some(20.0), Some(0.0), Some(3.0), Some(2.0), Some(1.0)], 2.5),
        ];
        let d = Dataset::new(five(), rows, Provenance::User).unwrap();
        let s = summarize(&d).unwrap();
        assert_eq!(s.missing_fraction, 0.1);
        assert_eq!(s.histogram, vec![1, 0, 1]);
        assert_eq!(s.target_mean, 1.5);
        assert_eq!((s.target_min, s.target_max), (0.5, 2.5));

        let full = d.filter_rows(|r| r.values.iter().all(Option::is_some));
        assert_eq!(summarize(&full).unwrap().missing_fraction, 0.0);
        assert_eq!(summarize(&d.filter_rows(|_| false)), Err(DatasetError::Empty));
    }
}
