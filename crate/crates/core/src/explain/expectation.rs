use crate::booster::{goes_left, Ensemble, TreeNode};
use crate::error::ExplainError;

/// Path-dependent expectation of one tree given the features in the
/// coalition: nodes on coalition features follow `x`, all other nodes take
/// the cover-weighted average of both children.
pub(crate) fn tree_expectation(node: &TreeNode, x: &[Option<f64>], in_coalition: &impl Fn(usize) -> bool) -> f64 {
    match node {
        TreeNode::Leaf { weight, .. } => *weight,
        TreeNode::Internal { feature, threshold, default_left, cover, left, right } => {
            if in_coalition(*feature) {
                let next = if goes_left(x[*feature], *threshold, *default_left) { left } else { right };
                tree_expectation(next, x, in_coalition)
            } else {
                (left.cover() * tree_expectation(left, x, in_coalition) + right.cover() * tree_expectation(right, x, in_coalition)) / cover
            }
        }
    }
}

pub(crate) fn ensemble_expectation(m: &Ensemble, x: &[Option<f64>], in_coalition: &impl Fn(usize) -> bool) -> f64 {
    m.trees().iter().fold(m.base_score(), |acc, t| acc + tree_expectation(t, x, in_coalition))
}

pub(crate) fn check_arity(m: &Ensemble, x: &[Option<f64>]) -> Result<(), ExplainError> {
    if x.len() != m.n_features() {
        return Err(ExplainError::Arity { expected: m.n_features(), found: x.len() });
    }
    Ok(())
}

/// Value of the coalition `coalition[j] == true` for instance `x`: the
/// model's expected output when only the coalition's features are known.
///
/// The full coalition gives `predict(x)`; the empty coalition gives the
/// cover-weighted mean output of the training data.
pub fn conditional_expectation(m: &Ensemble, x: &[Option<f64>], coalition: &[bool]) -> Result<f64, ExplainError> {
    check_arity(m, x)?;
    if coalition.len() != m.n_features() {
        return Err(ExplainError::Arity { expected: m.n_features(), found: coalition.len() });
    }
    Ok(ensemble_expectation(m, x, &|f| coalition[f]))
}
