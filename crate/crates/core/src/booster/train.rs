//! Exact greedy tree growing with sparsity-aware split search.

use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{leaf_weight, split_gain, Ensemble, Hyperparams, TreeNode};
use crate::dataset::Dataset;
use crate::error::{BoosterError, Error};
use crate::math;

const OUTSIDE: u32 = u32::MAX;

/// Fits an ensemble with squared-error loss (`g = prediction - target`, `h = 1`).
///
/// Each round samples rows without replacement and a per-tree column subset
/// from one seeded generator, grows a tree greedily to `max_depth`, and
/// updates the predictions of every training row.
pub fn train(d: &Dataset, p: &Hyperparams) -> Result<Ensemble, Error> {
    p.validate()?;
    let n = d.n_rows();
    if n < 2 {
        return Err(BoosterError::TooFewRows(n).into());
    }
    let y = d.targets();
    if let Some(i) = y.iter().position(|t| !t.is_finite()) {
        return Err(BoosterError::NonFiniteTarget(i).into());
    }
    let m = d.n_features();
    let columns: Vec<Vec<f64>> = (0..m).map(|j| d.rows().iter().map(|r| r.values[j].unwrap_or(f64::NAN)).collect()).collect();
    let sorted: Vec<Vec<u32>> = columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).filter(|&i| !col[i as usize].is_nan()).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = alloc::vec![base_score; n];
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut trees = Vec::with_capacity(p.n_estimators);
    let mut grad = alloc::vec![0.0; n];
    let hess = alloc::vec![1.0; n];

    for _ in 0..p.n_estimators {
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        let rows = sample_sorted(&mut rng, n, p.subsample);
        let features = if m == 0 { Vec::new() } else { sample_sorted(&mut rng, m, p.colsample_bytree) };
        let mut grower = Grower {
            columns: &columns,
            sorted: &sorted,
            grad: &grad,
            hess: &hess,
            features,
            params: p,
            node_of: alloc::vec![OUTSIDE; n],
            next_id: 0,
            scratch: Vec::new(),
        };
        let tree = grower.grow(rows, 0)?;
        for (i, pi) in pred.iter_mut().enumerate() {
            *pi += route_dense(&tree, &columns, i);
        }
        trees.push(tree);
    }
    Ok(Ensemble::from_parts(base_score, trees, d.schema(), *p)?)
}

/// `round(rate * n)` (at least 1) distinct indices in ascending order; all of
/// `0..n` when `rate` is 1.
fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<usize> {
    if rate >= 1.0 {
        return (0..n).collect();
    }
    let k = (math::round(rate * n as f64) as usize).clamp(1, n);
    let mut picked = index::sample(rng, n, k).into_vec();
    picked.sort_unstable();
    picked
}

fn route_dense(tree: &TreeNode, columns: &[Vec<f64>], row: usize) -> f64 {
    let mut node = tree;
    loop {
        match node {
            TreeNode::Leaf { weight, .. } => return *weight,
            TreeNode::Internal { feature, threshold, default_left, left, right, .. } => {
                let v = columns[*feature][row];
                let go_left = if v.is_nan() { *default_left } else { v < *threshold };
                node = if go_left { left } else { right };
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    default_left: bool,
    gain: f64,
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    sorted: &'a [Vec<u32>],
    grad: &'a [f64],
    hess: &'a [f64],
    features: Vec<usize>,
    params: &'a Hyperparams,
    node_of: Vec<u32>,
    next_id: u32,
    scratch: Vec<(f64, f64, f64)>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> Result<TreeNode, BoosterError> {
        let (g, h) = rows.iter().fold((0.0, 0.0), |(g, h), &i| (g + self.grad[i], h + self.hess[i]));
        let split = if depth < self.params.max_depth { self.best_split(&rows, g, h)? } else { None };
        let Some(split) = split else {
            let w = self.params.learning_rate * leaf_weight(g, h, self.params.reg_lambda)?;
            return Ok(TreeNode::leaf(w, h));
        };
        let col = &self.columns[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| {
            let v = col[i];
            if v.is_nan() {
                split.default_left
            } else {
                v < split.threshold
            }
        });
        let left = self.grow(left, depth + 1)?;
        let right = self.grow(right, depth + 1)?;
        Ok(TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            default_left: split.default_left,
            cover: left.cover() + right.cover(),
            left: alloc::boxed::Box::new(left),
            right: alloc::boxed::Box::new(right),
        })
    }

    /// Highest positive-gain split over the sampled features. Ties keep the
    /// earlier feature, the lower threshold, and the left default.
    fn best_split(&mut self, rows: &[usize], g_total: f64, h_total: f64) -> Result<Option<Split>, BoosterError> {
        let id = self.next_id;
        self.next_id += 1;
        for &i in rows {
            self.node_of[i] = id;
        }
        let p = self.params;
        let mut best: Option<Split> = None;
        let mut best_gain = 0.0;
        for fi in 0..self.features.len() {
            let f = self.features[fi];
            let col = &self.columns[f];
            self.scratch.clear();
            for &r in &self.sorted[f] {
                let r = r as usize;
                if self.node_of[r] == id {
                    self.scratch.push((col[r], self.grad[r], self.hess[r]));
                }
            }
            if self.scratch.len() < 2 {
                continue;
            }
            let (g_present, h_present) = self.scratch.iter().fold((0.0, 0.0), |(g, h), e| (g + e.1, h + e.2));
            let has_missing = self.scratch.len() < rows.len();
            let (g_miss, h_miss) = (g_total - g_present, h_total - h_present);
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..self.scratch.len() - 1 {
                let (v, gi, hi) = self.scratch[k];
                gl += gi;
                hl += hi;
                let next = self.scratch[k + 1].0;
                if !(v < next) {
                    continue;
                }
                let mut candidates = [(true, gl + g_miss, hl + h_miss, g_present - gl, h_present - hl), (false, gl, hl, g_total - gl, h_total - hl)];
                if !has_missing {
                    candidates[0] = (true, gl, hl, g_present - gl, h_present - hl);
                }
                let tries = if has_missing { 2 } else { 1 };
                for &(default_left, l_g, l_h, r_g, r_h) in &candidates[..tries] {
                    if l_h < p.min_child_weight || r_h < p.min_child_weight {
                        continue;
                    }
                    let gain = split_gain(l_g, l_h, r_g, r_h, p.reg_lambda, p.reg_gamma)?;
                    if gain > best_gain {
                        best_gain = gain;
                        best = Some(Split { feature: f, threshold: midpoint(v, next), default_left, gain });
                    }
                }
            }
        }
        debug_assert!(best.is_none_or(|s| s.gain > 0.0));
        Ok(best)
    }
}

/// A threshold `t` with `low < t <= high`.
fn midpoint(low: f64, high: f64) -> f64 {
    let mid = low + (high - low) / 2.0;
    if mid > low {
        mid
    } else {
        high
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Provenance, Sample};
    use crate::schema::VariableSpec;
    use alloc::vec;

    fn dataset(rows: Vec<(Vec<Option<f64>>, f64)>) -> Dataset {
        let m = rows[0].0.len();
        let schema = (0..m).map(|i| VariableSpec::continuous(&alloc::format!("x{i}"), "")).collect();
        Dataset::new(schema, rows.into_iter().map(|(v, t)| Sample::new(v, t)).collect(), Provenance::User).unwrap()
    }

    #[test]
    fn midpoint_separates_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a < t && t <= b);
        assert_eq!(midpoint(1.0, 3.0), 2.0);
    }

    #[test]
    fn empty_ensemble_predicts_mean() {
        let d = dataset(vec![(vec![Some(0.0)], 1.0), (vec![Some(1.0)], 3.0)]);
        let m = train(&d, &Hyperparams { n_estimators: 0, ..Default::default() }).unwrap();
        assert_eq!(m.predict(&[Some(5.0)]).unwrap(), 2.0);
        assert!(m.trees().is_empty());
    }

    #[test]
    fn too_few_rows() {
        let d = dataset(vec![(vec![Some(0.0)], 1.0)]);
        assert_eq!(train(&d, &Hyperparams::default()).unwrap_err(), Error::Booster(BoosterError::TooFewRows(1)));
    }

    #[test]
    fn constant_target_gives_leaves() {
        let d = dataset(vec![(vec![Some(0.0)], 2.0), (vec![Some(1.0)], 2.0), (vec![None], 2.0)]);
        let m = train(&d, &Hyperparams { n_estimators: 3, ..Default::default() }).unwrap();
        assert!(m.trees().iter().all(TreeNode::is_leaf));
        assert_eq!(m.predict(&[None]).unwrap(), 2.0);
    }

    #[test]
    fn learns_missing_direction() {
        // Missing rows behave like the high group, so they must default right.
        let mut rows = Vec::new();
        for i in 0..10 {
            rows.push((vec![Some(i as f64)], if i < 5 { 1.0 } else { 5.0 }));
        }
        for _ in 0..4 {
            rows.push((vec![None], 5.0));
        }
        let d = dataset(rows);
        let p = Hyperparams { n_estimators: 1, learning_rate: 1.0, max_depth: 1, reg_lambda: 0.0, ..Default::default() };
        let m = train(&d, &p).unwrap();
        match &m.trees()[0] {
            TreeNode::Internal { feature, threshold, default_left, cover, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 4.5);
                assert!(!default_left);
                assert_eq!(*cover, 14.0);
            }
            leaf => panic!("expected a split, got {leaf:?}"),
        }
        assert!((m.predict(&[None]).unwrap() - 5.0).abs() < 1e-12);
        assert!((m.predict(&[Some(0.0)]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_missing_defaults_left() {
        let rows = (0..8).map(|i| (vec![Some(i as f64)], if i < 4 { 1.0 } else { 2.0 })).collect();
        let p = Hyperparams { n_estimators: 1, max_depth: 1, ..Default::default() };
        let m = train(&dataset(rows), &p).unwrap();
        assert!(matches!(m.trees()[0], TreeNode::Internal { default_left: true, .. }));
    }

    #[test]
    fn min_child_weight_blocks_small_children() {
        let rows = (0..4).map(|i| (vec![Some(i as f64)], if i == 0 { 10.0 } else { 1.0 })).collect();
        let p = Hyperparams { n_estimators: 1, max_depth: 1, min_child_weight: 2.0, ..Default::default() };
        let m = train(&dataset(rows), &p).unwrap();
        if let TreeNode::Internal { left, right, .. } = &m.trees()[0] {
            assert!(left.cover() >= 2.0 && right.cover() >= 2.0);
        }
    }

    #[test]
    fn gamma_prunes_everything() {
        let rows = (0..8).map(|i| (vec![Some(i as f64)], 1.0 + i as f64)).collect();
        let p = Hyperparams { n_estimators: 2, reg_gamma: 1e6, ..Default::default() };
        let m = train(&dataset(rows), &p).unwrap();
        assert!(m.trees().iter().all(TreeNode::is_leaf));
    }
}
