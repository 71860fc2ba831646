//! Polynomial-time exact Shapley values for tree ensembles.
//!
//! The recursion keeps, for the current root-to-node path, the set of unique
//! features seen so far together with the fraction of "zero" (feature
//! unknown, cover-weighted) and "one" (feature known, follows `x`) paths that
//! flow through, and the permutation weights of every coalition size. At a
//! leaf each path feature receives its marginal contribution in closed form.
//! A feature met twice on a path is unwound first so every feature appears at
//! most once.
//!
//! Interaction values condition the same recursion on one feature being
//! always known (`Condition::On`) or always unknown (`Condition::Off`).

use alloc::vec::Vec;

use super::expectation::check_arity;
use super::{Attribution, InteractionMatrix};
use crate::booster::{goes_left, Ensemble, TreeNode};
use crate::error::ExplainError;

const ROOT: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero: f64,
    one: f64,
    weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Condition {
    None,
    On(usize),
    Off(usize),
}

impl Condition {
    fn feature(self) -> Option<usize> {
        match self {
            Condition::None => None,
            Condition::On(f) | Condition::Off(f) => Some(f),
        }
    }
}

fn extend(path: &mut Vec<PathElement>, zero: f64, one: f64, feature: usize) {
    let depth = path.len();
    path.push(PathElement { feature, zero, one, weight: if depth == 0 { 1.0 } else { 0.0 } });
    let scale = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / scale;
        path[i].weight = zero * path[i].weight * (depth - i) as f64 / scale;
    }
}

fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let PathElement { zero, one, .. } = path[index];
    let scale = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * scale / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (depth - i) as f64 / scale;
        } else {
            path[i].weight = path[i].weight * scale / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

/// Total permutation weight of the path with element `index` removed.
fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let PathElement { zero, one, .. } = path[index];
    let scale = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one * scale / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (depth - i) as f64 / scale;
        } else if zero != 0.0 {
            total += path[i].weight / zero * scale / (depth - i) as f64;
        }
    }
    total
}

struct Walk<'a> {
    x: &'a [Option<f64>],
    phi: &'a mut [f64],
    condition: Condition,
}

impl Walk<'_> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, node: &TreeNode, mut path: Vec<PathElement>, zero: f64, one: f64, feature: usize, condition_fraction: f64) {
        if condition_fraction == 0.0 {
            return;
        }
        if self.condition.feature() != Some(feature) {
            extend(&mut path, zero, one, feature);
        }
        match node {
            TreeNode::Leaf { weight, .. } => {
                for i in 1..path.len() {
                    let w = unwound_sum(&path, i);
                    let el = path[i];
                    self.phi[el.feature] += w * (el.one - el.zero) * weight * condition_fraction;
                }
            }
            TreeNode::Internal { feature: split, threshold, default_left, cover, left, right } => {
                let (hot, cold) = if goes_left(self.x[*split], *threshold, *default_left) { (left, right) } else { (right, left) };
                let hot_zero = hot.cover() / cover;
                let cold_zero = cold.cover() / cover;
                let (mut incoming_zero, mut incoming_one) = (1.0, 1.0);
                if let Some(k) = path.iter().position(|e| e.feature == *split) {
                    incoming_zero = path[k].zero;
                    incoming_one = path[k].one;
                    unwind(&mut path, k);
                }
                let (mut hot_fraction, mut cold_fraction) = (condition_fraction, condition_fraction);
                match self.condition {
                    Condition::On(f) if f == *split => cold_fraction = 0.0,
                    Condition::Off(f) if f == *split => {
                        hot_fraction *= hot_zero;
                        cold_fraction *= cold_zero;
                    }
                    _ => {}
                }
                self.recurse(hot, path.clone(), hot_zero * incoming_zero, incoming_one, *split, hot_fraction);
                self.recurse(cold, path, cold_zero * incoming_zero, 0.0, *split, cold_fraction);
            }
        }
    }
}

fn shap_values(m: &Ensemble, x: &[Option<f64>], condition: Condition) -> Vec<f64> {
    let mut phi = alloc::vec![0.0; m.n_features()];
    let mut walk = Walk { x, phi: &mut phi, condition };
    for tree in m.trees() {
        walk.recurse(tree, Vec::with_capacity(tree.depth() + 2), 1.0, 1.0, ROOT, 1.0);
    }
    phi
}

/// Expected model output under the path-dependent expectation with no
/// feature known.
pub fn base_value(m: &Ensemble) -> f64 {
    m.trees().iter().fold(m.base_score(), |acc, t| acc + t.expected_value())
}

/// Exact Shapley values in time polynomial in tree size and depth.
pub fn tree_shap(m: &Ensemble, x: &[Option<f64>]) -> Result<Attribution, ExplainError> {
    check_arity(m, x)?;
    Ok(Attribution { base_value: base_value(m), phi: shap_values(m, x, Condition::None), instance: x.to_vec() })
}

/// Pairwise interaction values. Each off-diagonal pair `[i][j]`, `[j][i]`
/// shares the interaction equally; the diagonal is the main effect, so every
/// row sums to the feature's Shapley value.
pub fn interactions(m: &Ensemble, x: &[Option<f64>]) -> Result<InteractionMatrix, ExplainError> {
    check_arity(m, x)?;
    let n = m.n_features();
    let phi = shap_values(m, x, Condition::None);
    let used = m.used_features();
    let mut raw = alloc::vec![alloc::vec![0.0; n]; n];
    for i in (0..n).filter(|&i| used[i]) {
        let on = shap_values(m, x, Condition::On(i));
        let off = shap_values(m, x, Condition::Off(i));
        for j in (0..n).filter(|&j| j != i) {
            raw[i][j] = (on[j] - off[j]) / 2.0;
        }
    }
    let mut values = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            values[i][j] = (raw[i][j] + raw[j][i]) / 2.0;
        }
        values[i][i] = phi[i] - (0..n).filter(|&j| j != i).map(|j| values[i][j]).sum::<f64>();
    }
    Ok(InteractionMatrix { values })
}
