//! Seeded stand-in data with a known generating function.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::booster::{Ensemble, Hyperparams, TreeNode};
use crate::dataset::{Dataset, Provenance, Sample};
use crate::error::{BoosterError, DatasetError};
use crate::math;
use crate::schema::{self, VariableSpec, TBTB, TBTC, TIME_BUDGET};

/// Generated targets are clamped from below to this many seconds.
pub const MIN_TARGET: f64 = 0.01;

/// One additive component of the ground-truth target function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetTerm {
    /// Linear interpolation between `(x, y)` knots, flat outside them.
    PiecewiseLinear { variable: String, knots: Vec<[f64; 2]> },
    /// One offset per admissible level of a coded variable.
    Offsets { variable: String, offsets: Vec<f64> },
    /// `coefficient * first * second`.
    Product { first: String, second: String, coefficient: f64 },
    /// Split on `root`, then on `child` on both sides; leaves in order
    /// (root left, child left), (root left, child right), (root right, child left), (root right, child right).
    DepthTwoTree { root: String, root_threshold: f64, child: String, child_threshold: f64, leaves: [f64; 4] },
}

/// Declares the synthetic target, noise, missingness and size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub intercept: f64,
    pub terms: Vec<TargetTerm>,
    /// Standard deviation of additive Gaussian noise, seconds.
    pub noise_sd: f64,
    /// Probability that any predictor cell is blanked.
    pub missing_rate: f64,
    /// Per-variable replacements for `missing_rate`.
    #[serde(default)]
    pub missing_overrides: Vec<(String, f64)>,
    /// `(variable, low, high)` sampling ranges for continuous variables.
    #[serde(default)]
    pub ranges: Vec<(String, f64, f64)>,
    pub rows: usize,
}

impl GeneratorSpec {
    /// A noiseless, complete generator with no terms.
    pub fn new(intercept: f64, rows: usize) -> Self {
        Self { intercept, terms: Vec::new(), noise_sd: 0.0, missing_rate: 0.0, missing_overrides: Vec::new(), ranges: Vec::new(), rows }
    }

    pub fn term(mut self, term: TargetTerm) -> Self {
        self.terms.push(term);
        self
    }

    pub fn noise(mut self, sd: f64) -> Self {
        self.noise_sd = sd;
        self
    }

    pub fn missing(mut self, rate: f64) -> Self {
        self.missing_rate = rate;
        self
    }

    /// Takeover-style data over [`schema::merged_schema`]: urgency and handheld
    /// offsets, piecewise-linear time budget and age effects, and an
    /// urgency-by-visual-TOR interaction.
    pub fn takeover(rows: usize, noise_sd: f64, missing_rate: f64) -> Self {
        Self::new(2.4, rows)
            .term(TargetTerm::Offsets { variable: "URG".into(), offsets: alloc::vec![0.9, 0.1, -0.7] })
            .term(TargetTerm::PiecewiseLinear { variable: TIME_BUDGET.into(), knots: alloc::vec![[2.0, -0.6], [15.0, 0.5], [30.0, 0.8]] })
            .term(TargetTerm::PiecewiseLinear { variable: "AGE".into(), knots: alloc::vec![[18.0, -0.3], [45.0, 0.4], [70.0, 0.0]] })
            .term(TargetTerm::Offsets { variable: "HAND".into(), offsets: alloc::vec![0.0, 0.35] })
            .term(TargetTerm::Product { first: "URG".into(), second: "TOR_V".into(), coefficient: -0.25 })
            .noise(noise_sd)
            .missing(missing_rate)
    }

    /// [`GeneratorSpec::takeover`] over [`schema::study_schema`]: the time
    /// budget effect reads `TBTC` and `TBTB` carries no signal.
    pub fn takeover_study(rows: usize, noise_sd: f64, missing_rate: f64) -> Self {
        let mut spec = Self::takeover(rows, noise_sd, missing_rate);
        for t in &mut spec.terms {
            if let TargetTerm::PiecewiseLinear { variable, .. } = t {
                if variable == TIME_BUDGET {
                    *variable = TBTC.into();
                }
            }
        }
        spec
    }

    fn check(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidGenerator(m));
        if self.rows == 0 {
            return bad("row count must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.missing_rate) {
            return bad(format!("missingness rate {} outside [0, 1]", self.missing_rate));
        }
        for (name, rate) in &self.missing_overrides {
            if !(0.0..=1.0).contains(rate) {
                return bad(format!("missingness rate {rate} for `{name}` outside [0, 1]"));
            }
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return bad(format!("noise standard deviation {} must be finite and non-negative", self.noise_sd));
        }
        for (name, lo, hi) in &self.ranges {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("range for `{name}` must satisfy low < high"));
            }
        }
        Ok(())
    }

    fn compile(&self, schema: &[VariableSpec]) -> Result<Vec<Compiled>, DatasetError> {
        let idx = |name: &str| schema::index_of(schema, name).ok_or_else(|| DatasetError::UnknownVariable(name.into()));
        self.terms
            .iter()
            .map(|t| {
                Ok(match t {
                    TargetTerm::PiecewiseLinear { variable, knots } => {
                        if knots.is_empty() || knots.windows(2).any(|w| !(w[0][0] < w[1][0])) {
                            return Err(DatasetError::InvalidGenerator(format!("knots for `{variable}` must be non-empty with increasing x")));
                        }
                        Compiled::Piecewise(idx(variable)?, knots.clone())
                    }
                    TargetTerm::Offsets { variable, offsets } => {
                        let i = idx(variable)?;
                        let levels = &schema[i].levels;
                        if levels.is_empty() || levels.len() != offsets.len() {
                            return Err(DatasetError::InvalidGenerator(format!(
                                "`{variable}` needs one offset per level ({} levels, {} offsets)",
                                levels.len(),
                                offsets.len()
                            )));
                        }
                        Compiled::Offsets(i, levels[0], offsets.clone())
                    }
                    TargetTerm::Product { first, second, coefficient } => Compiled::Product(idx(first)?, idx(second)?, *coefficient),
                    TargetTerm::DepthTwoTree { root, root_threshold, child, child_threshold, leaves } => {
                        Compiled::Tree(idx(root)?, *root_threshold, idx(child)?, *child_threshold, *leaves)
                    }
                })
            })
            .collect()
    }

    /// Noise-free target for a fully observed row of `schema`.
    pub fn evaluate(&self, schema: &[VariableSpec], values: &[f64]) -> Result<f64, DatasetError> {
        if values.len() != schema.len() {
            return Err(DatasetError::Arity { row: 0, expected: schema.len(), found: values.len() });
        }
        let terms = self.compile(schema)?;
        Ok(eval(self.intercept, &terms, values))
    }

    fn range_for(&self, spec: &VariableSpec) -> (f64, f64) {
        if let Some((_, lo, hi)) = self.ranges.iter().find(|(n, _, _)| *n == spec.name) {
            return (*lo, *hi);
        }
        match spec.name.as_str() {
            "AGE" => (18.0, 70.0),
            TIME_BUDGET | TBTC | TBTB => (1.0, 30.0),
            _ => (0.0, 1.0),
        }
    }

    fn missing_rate_for(&self, name: &str) -> f64 {
        self.missing_overrides.iter().find(|(n, _)| n == name).map_or(self.missing_rate, |(_, r)| *r)
    }
}

#[derive(Debug, Clone)]
enum Compiled {
    Piecewise(usize, Vec<[f64; 2]>),
    Offsets(usize, i64, Vec<f64>),
    Product(usize, usize, f64),
    Tree(usize, f64, usize, f64, [f64; 4]),
}

fn interpolate(knots: &[[f64; 2]], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    let k = knots.windows(2).find(|w| x < w[1][0]).expect("x inside knot range");
    let t = (x - k[0][0]) / (k[1][0] - k[0][0]);
    k[0][1] + t * (k[1][1] - k[0][1])
}

fn eval(intercept: f64, terms: &[Compiled], x: &[f64]) -> f64 {
    let mut y = intercept;
    for t in terms {
        y += match t {
            Compiled::Piecewise(i, knots) => interpolate(knots, x[*i]),
            Compiled::Offsets(i, first, offsets) => offsets[(x[*i] as i64 - first) as usize],
            Compiled::Product(a, b, c) => c * x[*a] * x[*b],
            Compiled::Tree(r, rt, c, ct, leaves) => {
                let right = usize::from(x[*r] >= *rt) * 2;
                leaves[right + usize::from(x[*c] >= *ct)]
            }
        };
    }
    y
}

/// Generated data together with the function that produced it.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub truth: GeneratorSpec,
    /// Noise-free, unclamped target of every row, computed before blanking cells.
    pub clean_targets: Vec<f64>,
}

/// Draws `spec.rows` samples over `schema`. Coded variables are uniform over
/// their levels; continuous variables are uniform over their range, rounded
/// to 0.01. The target is computed from the complete row, then noise is added,
/// the result clamped to at least [`MIN_TARGET`], and finally cells are blanked.
pub fn synthesize(schema: &[VariableSpec], spec: &GeneratorSpec, seed: u64) -> Result<Synthetic, DatasetError> {
    spec.check()?;
    schema::validate_schema(schema)?;
    let terms = spec.compile(schema)?;
    for (name, _, _) in &spec.ranges {
        schema::index_of(schema, name).ok_or_else(|| DatasetError::UnknownVariable(name.clone()))?;
    }
    for (name, _) in &spec.missing_overrides {
        schema::index_of(schema, name).ok_or_else(|| DatasetError::UnknownVariable(name.clone()))?;
    }
    let ranges: Vec<(f64, f64)> = schema.iter().map(|v| spec.range_for(v)).collect();
    let rates: Vec<f64> = schema.iter().map(|v| spec.missing_rate_for(&v.name)).collect();
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| DatasetError::InvalidGenerator(format!("{e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(spec.rows);
    let mut clean_targets = Vec::with_capacity(spec.rows);
    let mut full = alloc::vec![0.0; schema.len()];
    for _ in 0..spec.rows {
        for (j, v) in schema.iter().enumerate() {
            full[j] = if v.is_coded() {
                v.levels[rng.random_range(0..v.levels.len())] as f64
            } else {
                let (lo, hi) = ranges[j];
                math::round(rng.random_range(lo..hi) * 100.0) / 100.0
            };
        }
        let clean = eval(spec.intercept, &terms, &full);
        let noisy = if spec.noise_sd > 0.0 { clean + noise.sample(&mut rng) } else { clean };
        let target = noisy.max(MIN_TARGET);
        let values = full.iter().zip(&rates).map(|(&x, &p)| if p > 0.0 && rng.random_bool(p) { None } else { Some(x) }).collect();
        rows.push(Sample::new(values, target));
        clean_targets.push(clean);
    }
    let dataset = Dataset::new(schema.to_vec(), rows, Provenance::Synthetic)?;
    Ok(Synthetic { dataset, truth: spec.clone(), clean_targets })
}

/// Shape of the random ensembles drawn by [`random_ensemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleShape {
    pub features: usize,
    pub trees: usize,
    pub max_depth: usize,
}

/// Draws an ensemble of random trees over `shape.features` continuous
/// variables `x0, x1, ...` in `[0, 1)`. Nodes split with probability 0.7 until
/// `max_depth`; leaves get weights in `[-1, 1)` and integer covers in `1..=20`.
/// Useful for exercising explanation code on models that training would never
/// produce (repeated features on a path, unbalanced covers).
pub fn random_ensemble(shape: EnsembleShape, seed: u64) -> Result<Ensemble, BoosterError> {
    let schema: Vec<VariableSpec> = (0..shape.features).map(|j| VariableSpec::continuous(&format!("x{j}"), "")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..shape.trees).map(|_| random_tree(&mut rng, shape.features, shape.max_depth)).collect();
    let base = rng.random_range(-1.0..1.0);
    Ensemble::from_parts(base, trees, &schema, Hyperparams::default())
}

fn random_tree(rng: &mut ChaCha8Rng, features: usize, depth: usize) -> TreeNode {
    if depth == 0 || features == 0 || !rng.random_bool(0.7) {
        return TreeNode::leaf(rng.random_range(-1.0..1.0), rng.random_range(1..=20) as f64);
    }
    let feature = rng.random_range(0..features);
    let threshold = rng.random_range(0.0..1.0);
    let default_left = rng.random_bool(0.5);
    let left = random_tree(rng, features, depth - 1);
    let right = random_tree(rng, features, depth - 1);
    TreeNode::split(feature, threshold, default_left, left, right)
}

/// Uniform `[0, 1)` values with each cell missing with probability `missing_rate`.
pub fn random_instance(rng: &mut impl Rng, features: usize, missing_rate: f64) -> Vec<Option<f64>> {
    (0..features).map(|_| if rng.random_bool(missing_rate) { None } else { Some(rng.random_range(0.0..1.0)) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::summarize;
    use crate::schema::{merged_schema, study_schema};

    #[test]
    fn noiseless_targets_follow_formula() {
        let schema = merged_schema();
        let spec =
            GeneratorSpec::new(1.0, 500).term(TargetTerm::PiecewiseLinear { variable: TIME_BUDGET.into(), knots: alloc::vec![[0.0, 0.0], [100.0, 20.0]] });
        let s = synthesize(&schema, &spec, 3).unwrap();
        let tb = schema::index_of(&schema, TIME_BUDGET).unwrap();
        for row in s.dataset.rows() {
            let x = row.values[tb].unwrap();
            assert!((row.target - (1.0 + 0.2 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GeneratorSpec::takeover(100, 0.3, 0.1);
        let a = synthesize(&merged_schema(), &spec, 11).unwrap();
        let b = synthesize(&merged_schema(), &spec, 11).unwrap();
        let c = synthesize(&merged_schema(), &spec, 12).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn study_generator_reads_tbtc() {
        let spec = GeneratorSpec::takeover_study(50, 0.0, 0.0);
        let schema = study_schema();
        let s = synthesize(&schema, &spec, 3).unwrap();
        let tbtb = schema::index_of(&schema, TBTB).unwrap();
        let mut row: Vec<f64> = s.dataset.rows()[0].values.iter().map(|v| v.unwrap()).collect();
        let before = spec.evaluate(&schema, &row).unwrap();
        row[tbtb] += 10.0;
        assert_eq!(spec.evaluate(&schema, &row).unwrap(), before);
    }

    #[test]
    fn missingness_concentrates() {
        // 18 x 519 Bernoulli(0.1) cells: sd of the fraction is about 0.0031,
        // so +/-0.02 is more than six standard deviations.
        let spec = GeneratorSpec::new(2.0, 519).missing(0.1);
        for seed in 0..5 {
            let s = synthesize(&study_schema(), &spec, seed).unwrap();
            let f = summarize(&s.dataset).unwrap().missing_fraction;
            assert!((f - 0.1).abs() < 0.02, "seed {seed}: {f}");
        }
    }

    #[test]
    fn invalid_specs() {
        let schema = merged_schema();
        assert!(synthesize(&schema, &GeneratorSpec::new(1.0, 0), 0).is_err());
        assert!(synthesize(&schema, &GeneratorSpec::new(1.0, 5).missing(1.5), 0).is_err());
        assert!(synthesize(&schema, &GeneratorSpec::new(1.0, 5).missing(-0.1), 0).is_err());
        let unknown = GeneratorSpec::new(1.0, 5).term(TargetTerm::Product { first: "NOPE".into(), second: "URG".into(), coefficient: 1.0 });
        assert_eq!(synthesize(&schema, &unknown, 0).unwrap_err(), DatasetError::UnknownVariable("NOPE".into()));
        let wrong_offsets = GeneratorSpec::new(1.0, 5).term(TargetTerm::Offsets { variable: "URG".into(), offsets: alloc::vec![1.0] });
        assert!(synthesize(&schema, &wrong_offsets, 0).is_err());
    }

    #[test]
    fn targets_clamped_positive() {
        let spec = GeneratorSpec::new(-5.0, 50).noise(1.0);
        let s = synthesize(&merged_schema(), &spec, 1).unwrap();
        assert!(s.dataset.rows().iter().all(|r| r.target >= MIN_TARGET));
    }

    #[test]
    fn piecewise_interpolation() {
        let knots = [[0.0, 0.0], [10.0, 1.0], [20.0, 0.0]];
        assert_eq!(interpolate(&knots, -3.0), 0.0);
        assert_eq!(interpolate(&knots, 5.0), 0.5);
        assert_eq!(interpolate(&knots, 15.0), 0.5);
        assert_eq!(interpolate(&knots, 25.0), 0.0);
    }

    #[test]
    fn depth_two_tree_leaves() {
        let schema = alloc::vec![VariableSpec::continuous("a", ""), VariableSpec::continuous("b", "")];
        let spec = GeneratorSpec::new(0.0, 1).term(TargetTerm::DepthTwoTree {
            root: "a".into(),
            root_threshold: 0.5,
            child: "b".into(),
            child_threshold: 0.5,
            leaves: [1.0, 2.0, 3.0, 4.0],
        });
        assert_eq!(spec.evaluate(&schema, &[0.1, 0.1]).unwrap(), 1.0);
        assert_eq!(spec.evaluate(&schema, &[0.1, 0.9]).unwrap(), 2.0);
        assert_eq!(spec.evaluate(&schema, &[0.9, 0.1]).unwrap(), 3.0);
        assert_eq!(spec.evaluate(&schema, &[0.9, 0.9]).unwrap(), 4.0);
    }
}
