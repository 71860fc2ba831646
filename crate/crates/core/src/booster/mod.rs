//! Regularized second-order gradient boosting of regression trees.
//!
//! Trees split on `value < threshold` (left) and send missing values along a
//! per-node default direction learned during training. Stored leaf weights
//! already include the learning rate, so a prediction is the base score plus
//! one leaf weight per tree.

mod objective;
mod train;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use objective::{leaf_weight, split_gain};
pub use train::train;

use crate::dataset::Dataset;
use crate::error::BoosterError;
use crate::math;
use crate::schema::{self, VariableSpec};

/// Training configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub reg_lambda: f64,
    pub reg_gamma: f64,
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            subsample: 1.0,
            colsample_bytree: 1.0,
            reg_lambda: 1.0,
            reg_gamma: 0.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), BoosterError> {
        let unit = |name, value: f64| {
            if value > 0.0 && value <= 1.0 {
                Ok(())
            } else {
                Err(BoosterError::InvalidParam { name, value, constraint: "0 < value <= 1" })
            }
        };
        let nonneg = |name, value: f64| {
            if value >= 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(BoosterError::InvalidParam { name, value, constraint: "finite and >= 0" })
            }
        };
        unit("learning_rate", self.learning_rate)?;
        unit("subsample", self.subsample)?;
        unit("colsample_bytree", self.colsample_bytree)?;
        nonneg("reg_lambda", self.reg_lambda)?;
        nonneg("reg_gamma", self.reg_gamma)?;
        nonneg("min_child_weight", self.min_child_weight)?;
        Ok(())
    }
}

/// A node of a regression tree. `cover` is the hessian sum of the training
/// rows routed through the node (the row count for squared error).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        default_left: bool,
        cover: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        #[serde(rename = "leaf")]
        weight: f64,
        cover: f64,
    },
}

impl TreeNode {
    pub fn leaf(weight: f64, cover: f64) -> Self {
        TreeNode::Leaf { weight, cover }
    }

    /// Internal node whose cover is the sum of its children's covers.
    pub fn split(feature: usize, threshold: f64, default_left: bool, left: TreeNode, right: TreeNode) -> Self {
        let cover = left.cover() + right.cover();
        TreeNode::Internal { feature, threshold, default_left, cover, left: Box::new(left), right: Box::new(right) }
    }

    pub fn cover(&self) -> f64 {
        match self {
            TreeNode::Internal { cover, .. } | TreeNode::Leaf { cover, .. } => *cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    /// Leaf weight reached by `x`.
    pub fn predict(&self, x: &[Option<f64>]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight, .. } => return *weight,
                TreeNode::Internal { feature, threshold, default_left, left, right, .. } => {
                    node = if goes_left(x[*feature], *threshold, *default_left) { left } else { right };
                }
            }
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Cover-weighted mean of the leaf weights.
    pub fn expected_value(&self) -> f64 {
        match self {
            TreeNode::Leaf { weight, .. } => *weight,
            TreeNode::Internal { cover, left, right, .. } => (left.cover() * left.expected_value() + right.cover() * right.expected_value()) / cover,
        }
    }

    /// Calls `f` on every node, parents before children.
    pub fn visit(&self, f: &mut impl FnMut(&TreeNode)) {
        f(self);
        if let TreeNode::Internal { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }

    fn check(&self, n_features: usize) -> Result<(), BoosterError> {
        match self {
            TreeNode::Leaf { weight, cover } => {
                if !weight.is_finite() || !(*cover >= 0.0) || !cover.is_finite() {
                    return Err(BoosterError::InvalidTree(format!("leaf with weight {weight} and cover {cover}")));
                }
                Ok(())
            }
            TreeNode::Internal { feature, threshold, cover, left, right, .. } => {
                if *feature >= n_features {
                    return Err(BoosterError::InvalidTree(format!("feature {feature} out of range for {n_features} features")));
                }
                if threshold.is_nan() {
                    return Err(BoosterError::InvalidTree("NaN threshold".into()));
                }
                let sum = left.cover() + right.cover();
                if !(*cover > 0.0) || math::abs(cover - sum) > 1e-9 * cover.max(1.0) {
                    return Err(BoosterError::InvalidTree(format!("internal cover {cover} != children sum {sum}")));
                }
                left.check(n_features)?;
                right.check(n_features)
            }
        }
    }
}

#[inline]
pub(crate) fn goes_left(value: Option<f64>, threshold: f64, default_left: bool) -> bool {
    match value {
        Some(v) => v < threshold,
        None => default_left,
    }
}

#[derive(Deserialize)]
struct RawEnsemble {
    base_score: f64,
    params: Hyperparams,
    schema_fingerprint: String,
    feature_names: Vec<String>,
    trees: Vec<TreeNode>,
}

/// A trained additive tree model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble")]
pub struct Ensemble {
    base_score: f64,
    params: Hyperparams,
    schema_fingerprint: String,
    feature_names: Vec<String>,
    trees: Vec<TreeNode>,
}

impl TryFrom<RawEnsemble> for Ensemble {
    type Error = BoosterError;

    fn try_from(raw: RawEnsemble) -> Result<Self, Self::Error> {
        let e = Ensemble {
            base_score: raw.base_score,
            params: raw.params,
            schema_fingerprint: raw.schema_fingerprint,
            feature_names: raw.feature_names,
            trees: raw.trees,
        };
        e.check()?;
        Ok(e)
    }
}

impl Ensemble {
    /// Assembles and validates a model over `schema`.
    pub fn from_parts(base_score: f64, trees: Vec<TreeNode>, schema: &[VariableSpec], params: Hyperparams) -> Result<Self, BoosterError> {
        let e = Ensemble { base_score, params, schema_fingerprint: schema::fingerprint(schema), feature_names: schema::names(schema), trees };
        e.check()?;
        Ok(e)
    }

    fn check(&self) -> Result<(), BoosterError> {
        if !self.base_score.is_finite() {
            return Err(BoosterError::InvalidTree(format!("base score {}", self.base_score)));
        }
        self.params.validate()?;
        self.trees.iter().try_for_each(|t| t.check(self.feature_names.len()))
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn schema_fingerprint(&self) -> &str {
        &self.schema_fingerprint
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    /// The model after its first `rounds` boosting rounds.
    pub fn truncated(&self, rounds: usize) -> Ensemble {
        let mut e = self.clone();
        e.trees.truncate(rounds);
        e
    }

    pub fn check_arity(&self, x: &[Option<f64>]) -> Result<(), BoosterError> {
        if x.len() != self.n_features() {
            return Err(BoosterError::Arity { expected: self.n_features(), found: x.len() });
        }
        Ok(())
    }

    /// Whether the dataset has the schema this model was trained on.
    pub fn matches(&self, d: &Dataset) -> bool {
        d.fingerprint() == self.schema_fingerprint
    }

    pub fn predict(&self, x: &[Option<f64>]) -> Result<f64, BoosterError> {
        self.check_arity(x)?;
        Ok(self.trees.iter().fold(self.base_score, |acc, t| acc + t.predict(x)))
    }

    pub fn predict_rows(&self, d: &Dataset) -> Result<Vec<f64>, BoosterError> {
        d.rows().iter().map(|r| self.predict(&r.values)).collect()
    }

    /// Features that at least one tree splits on.
    pub fn used_features(&self) -> Vec<bool> {
        let mut used = alloc::vec![false; self.n_features()];
        for t in &self.trees {
            t.visit(&mut |n| {
                if let TreeNode::Internal { feature, .. } = n {
                    used[*feature] = true;
                }
            });
        }
        used
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn schema(m: usize) -> Vec<VariableSpec> {
        (0..m).map(|i| VariableSpec::continuous(&format!("x{i}"), "")).collect()
    }

    #[test]
    fn hand_routed_stump() {
        let tree = TreeNode::split(0, 0.5, true, TreeNode::leaf(1.0, 1.0), TreeNode::leaf(2.0, 1.0));
        let m = Ensemble::from_parts(0.0, vec![tree], &schema(1), Hyperparams::default()).unwrap();
        assert_eq!(m.predict(&[Some(0.2)]).unwrap(), 1.0);
        assert_eq!(m.predict(&[Some(0.5)]).unwrap(), 2.0);
        assert_eq!(m.predict(&[None]).unwrap(), 1.0);
        assert!(matches!(m.predict(&[None, None]), Err(BoosterError::Arity { expected: 1, found: 2 })));
    }

    #[test]
    fn validation_rejects_bad_trees() {
        let bad_feature = TreeNode::split(3, 0.5, true, TreeNode::leaf(1.0, 1.0), TreeNode::leaf(2.0, 1.0));
        assert!(Ensemble::from_parts(0.0, vec![bad_feature], &schema(1), Hyperparams::default()).is_err());
        let bad_cover = TreeNode::Internal {
            feature: 0,
            threshold: 0.5,
            default_left: true,
            cover: 5.0,
            left: Box::new(TreeNode::leaf(1.0, 1.0)),
            right: Box::new(TreeNode::leaf(1.0, 1.0)),
        };
        assert!(Ensemble::from_parts(0.0, vec![bad_cover], &schema(1), Hyperparams::default()).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        for p in [
            Hyperparams { learning_rate: 0.0, ..Default::default() },
            Hyperparams { learning_rate: 1.5, ..Default::default() },
            Hyperparams { subsample: 0.0, ..Default::default() },
            Hyperparams { colsample_bytree: 1.1, ..Default::default() },
            Hyperparams { reg_lambda: -1.0, ..Default::default() },
            Hyperparams { reg_gamma: f64::NAN, ..Default::default() },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn expected_value_is_cover_weighted() {
        let tree = TreeNode::split(0, 0.5, true, TreeNode::leaf(1.0, 40.0), TreeNode::leaf(3.0, 60.0));
        assert!((tree.expected_value() - 2.2).abs() < 1e-15);
        assert_eq!(tree.depth(), 1);
    }
}
