//! Shapley explanations of ensemble predictions.
//!
//! The value of a coalition `S` is the path-dependent tree expectation
//! ([`conditional_expectation`]). [`brute_shap`] and [`brute_interactions`]
//! enumerate every coalition and serve as the reference for the polynomial
//! [`tree_shap`] and [`interactions`]. The remaining functions turn
//! per-instance attributions into importance rankings, dependence-plot
//! records and force-plot records.

mod brute;
mod expectation;
mod tree_shap;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use brute::{brute_interactions, brute_shap, MAX_ENUMERATED_FEATURES};
pub use expectation::conditional_expectation;
pub use tree_shap::{base_value, interactions, tree_shap};

use crate::booster::Ensemble;
use crate::dataset::Dataset;
use crate::error::ExplainError;
use crate::math;
use crate::par;

/// Per-instance attribution: `base_value + Σ phi = prediction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub base_value: f64,
    pub phi: Vec<f64>,
    pub instance: Vec<Option<f64>>,
}

impl Attribution {
    /// `base_value + Σ phi`.
    pub fn output(&self) -> f64 {
        self.phi.iter().fold(self.base_value, |acc, p| acc + p)
    }
}

/// Symmetric interaction matrix whose diagonal holds main effects and whose
/// rows sum to the Shapley values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub values: Vec<Vec<f64>>,
}

impl InteractionMatrix {
    pub fn row_sums(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn main_effects(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.values[i][i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedVariable {
    pub variable: String,
    pub score: f64,
}

/// Variables ranked by `Σ_i |phi_j^(i)|` over a reference dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub ranking: Vec<RankedVariable>,
    /// One row of Shapley values per reference instance.
    pub per_instance: Vec<Vec<f64>>,
}

impl GlobalImportance {
    pub fn ranked_names(&self) -> Vec<String> {
        self.ranking.iter().map(|r| r.variable.clone()).collect()
    }
}

fn check_dataset(m: &Ensemble, d: &Dataset) -> Result<(), ExplainError> {
    if !m.matches(d) {
        return Err(ExplainError::SchemaMismatch);
    }
    if d.is_empty() {
        return Err(ExplainError::EmptyDataset);
    }
    Ok(())
}

pub fn global_importance(m: &Ensemble, d: &Dataset) -> Result<GlobalImportance, ExplainError> {
    check_dataset(m, d)?;
    let per_instance = par::map(d.rows(), |r| tree_shap(m, &r.values).map(|a| a.phi)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let n = m.n_features();
    let mut scores = alloc::vec![0.0; n];
    for phi in &per_instance {
        for (s, p) in scores.iter_mut().zip(phi) {
            *s += math::abs(*p);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let ranking = order.into_iter().map(|j| RankedVariable { variable: m.feature_names()[j].clone(), score: scores[j] }).collect();
    Ok(GlobalImportance { ranking, per_instance })
}

/// One point of a dependence plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceRecord {
    pub feature_value: Option<f64>,
    /// Diagonal of the interaction matrix for the plotted feature.
    pub main_effect: f64,
    /// Shapley value of the plotted feature.
    pub phi_total: f64,
    pub color_value: Option<f64>,
}

/// Dependence-plot data for one feature, coloured by its strongest
/// interaction partner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceData {
    pub feature: String,
    /// The other feature with the largest `Σ_i |interaction[feature][j]|`;
    /// `None` for single-feature models.
    pub color_feature: Option<String>,
    pub color_mass: f64,
    pub records: Vec<DependenceRecord>,
}

pub fn dependence_data(m: &Ensemble, d: &Dataset, feature: usize) -> Result<DependenceData, ExplainError> {
    let n = m.n_features();
    if feature >= n {
        return Err(ExplainError::FeatureOutOfRange { index: feature, m: n });
    }
    check_dataset(m, d)?;
    let rows: Vec<(Vec<f64>, f64)> = par::map(d.rows(), |r| {
        interactions(m, &r.values).map(|im| {
            let row = im.values[feature].clone();
            let total = row.iter().sum();
            (row, total)
        })
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let mut mass = alloc::vec![0.0; n];
    for (row, _) in &rows {
        for (acc, v) in mass.iter_mut().zip(row) {
            *acc += math::abs(*v);
        }
    }
    let color = (0..n).filter(|&j| j != feature).fold(None, |best: Option<usize>, j| match best {
        Some(b) if mass[b] >= mass[j] => Some(b),
        _ => Some(j),
    });
    let records = d
        .rows()
        .iter()
        .zip(&rows)
        .map(|(r, (row, total))| DependenceRecord {
            feature_value: r.values[feature],
            main_effect: row[feature],
            phi_total: *total,
            color_value: color.and_then(|c| r.values[c]),
        })
        .collect();
    Ok(DependenceData {
        feature: m.feature_names()[feature].clone(),
        color_feature: color.map(|c| m.feature_names()[c].clone()),
        color_mass: color.map_or(0.0, |c| mass[c]),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub variable: String,
    pub value: Option<f64>,
    pub phi: f64,
}

/// Force-plot data: how each feature pushes the output away from the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceRecord {
    pub base_value: f64,
    pub output: f64,
    /// Every feature, sorted by `|phi|` descending (ties in schema order).
    pub contributions: Vec<Contribution>,
}

pub fn force_data(m: &Ensemble, x: &[Option<f64>]) -> Result<ForceRecord, ExplainError> {
    let a = tree_shap(m, x)?;
    let mut contributions: Vec<Contribution> =
        m.feature_names().iter().zip(x).zip(&a.phi).map(|((name, value), phi)| Contribution { variable: name.clone(), value: *value, phi: *phi }).collect();
    contributions.sort_by(|a, b| math::abs(b.phi).total_cmp(&math::abs(a.phi)));
    Ok(ForceRecord { base_value: a.base_value, output: a.output(), contributions })
}
