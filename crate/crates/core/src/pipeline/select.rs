use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::cv::{check_cv, cross_validate, CVReport};
use crate::booster::{self, Hyperparams};
use crate::dataset::Dataset;
use crate::error::Error;
use crate::explain::{self, RankedVariable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub feature_added: String,
    pub report: CVReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Global importance of the all-feature model that fixed the order.
    pub importance: Vec<RankedVariable>,
    pub steps: Vec<SelectionStep>,
    pub chosen: Vec<String>,
}

/// Forward selection along the importance ranking of a model trained on all
/// features: grows the feature prefix one variable at a time and stops at the
/// first prefix whose mean RMSE is not strictly lower than its predecessor's.
pub fn forward_select(d: &Dataset, p: &Hyperparams, k: usize, seeds: &[u64]) -> Result<SelectionReport, Error> {
    check_cv(d, k, seeds, &[])?;
    let model = booster::train(d, p)?;
    let importance = explain::global_importance(&model, d)?.ranking;
    let order = d.indices_of(&importance.iter().map(|r| r.variable.as_str()).collect::<Vec<_>>())?;

    let mut steps: Vec<SelectionStep> = Vec::new();
    let mut chosen_len = 0;
    for len in 1..=order.len() {
        let report = cross_validate(d, p, k, seeds, &order[..len])?;
        let improved = steps.last().is_none_or(|prev| report.mean.rmse < prev.report.mean.rmse);
        steps.push(SelectionStep { feature_added: importance[len - 1].variable.clone(), report });
        if !improved {
            break;
        }
        chosen_len = len;
    }
    let chosen = importance[..chosen_len].iter().map(|r| r.variable.clone()).collect();
    Ok(SelectionReport { importance, steps, chosen })
}
