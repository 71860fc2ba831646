use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::booster::{self, Hyperparams};
use crate::dataset::Dataset;
use crate::error::{Error, PipelineError};
use crate::metrics::MetricsReport;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedScore {
    pub seed: u64,
    pub metrics: MetricsReport,
}

/// Repeated k-fold results: one pooled out-of-fold score per seed and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub per_seed: Vec<SeedScore>,
    pub mean: MetricsReport,
    pub min_mae: f64,
    pub max_mae: f64,
    pub feature_set: Vec<String>,
    /// Booster configuration; `None` for the linear baseline.
    pub params: Option<Hyperparams>,
}

/// Splits a seeded shuffle of `0..n` into `k` contiguous folds whose sizes
/// differ by at most one (the first `n % k` folds get the extra row).
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    folds_with(&mut rng, n, k)
}

fn folds_with(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    folds
}

pub(crate) fn check_cv(d: &Dataset, k: usize, seeds: &[u64], features: &[usize]) -> Result<(), PipelineError> {
    if k < 2 || k > d.n_rows() {
        return Err(PipelineError::InvalidFolds { k, n: d.n_rows() });
    }
    if seeds.is_empty() {
        return Err(PipelineError::NoSeeds);
    }
    if let Some(&f) = features.iter().find(|&&f| f >= d.n_features()) {
        return Err(PipelineError::FeatureOutOfRange(f));
    }
    Ok(())
}

/// Shared harness: for every seed, shuffle, fit on k-1 folds, predict the
/// held-out fold, and score the pooled out-of-fold predictions once.
/// `fit_predict(train, test, model_seed)` returns predictions for `test`.
pub(crate) fn run_cv<F>(d: &Dataset, k: usize, seeds: &[u64], features: &[usize], params: Option<Hyperparams>, fit_predict: F) -> Result<CVReport, Error>
where
    F: Fn(&Dataset, &Dataset, u64) -> Result<Vec<f64>, Error> + Sync + Send,
{
    check_cv(d, k, seeds, features)?;
    let projected = d.select_features(features)?;
    let y = projected.targets();
    let n = projected.n_rows();
    let per_seed = par::map(seeds, |&seed| -> Result<SeedScore, Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let folds = folds_with(&mut rng, n, k);
        let mut oof = alloc::vec![0.0; n];
        for (f, held_out) in folds.iter().enumerate() {
            let train_rows: Vec<usize> = folds.iter().enumerate().filter(|(g, _)| *g != f).flat_map(|(_, rows)| rows.iter().copied()).collect();
            let model_seed = rng.next_u64();
            let preds = fit_predict(&projected.subset(&train_rows), &projected.subset(held_out), model_seed)?;
            for (&row, p) in held_out.iter().zip(preds) {
                oof[row] = p;
            }
        }
        Ok(SeedScore { seed, metrics: MetricsReport::compute(&y, &oof, features.len())? })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let reports: Vec<MetricsReport> = per_seed.iter().map(|s| s.metrics).collect();
    let maes = reports.iter().map(|r| r.mae);
    let min_mae = maes.clone().fold(f64::INFINITY, f64::min);
    let max_mae = maes.fold(f64::NEG_INFINITY, f64::max);
    Ok(CVReport { per_seed, mean: MetricsReport::mean_of(&reports), min_mae, max_mae, feature_set: projected.feature_names(), params })
}

/// Repeated k-fold cross-validation of the booster on the given feature
/// columns. Each fold's model is seeded from the fold shuffle stream mixed
/// with `p.seed`.
pub fn cross_validate(d: &Dataset, p: &Hyperparams, k: usize, seeds: &[u64], features: &[usize]) -> Result<CVReport, Error> {
    if features.is_empty() {
        return Err(PipelineError::NoFeatures.into());
    }
    p.validate()?;
    run_cv(d, k, seeds, features, Some(*p), |train, test, model_seed| {
        let params = Hyperparams { seed: p.seed ^ model_seed, ..*p };
        let model = booster::train(train, &params)?;
        Ok(model.predict_rows(test)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Provenance, Sample};
    use crate::schema::VariableSpec;
    use proptest::prelude::*;

    fn constant(n: usize) -> Dataset {
        let rows = (0..n).map(|i| Sample::new(alloc::vec![Some(i as f64)], 2.5)).collect();
        Dataset::new(alloc::vec![VariableSpec::continuous("x", "")], rows, Provenance::User).unwrap()
    }

    #[test]
    fn constant_target_scores_zero() {
        let r = cross_validate(&constant(4), &Hyperparams::default(), 2, &[0, 1, 2], &[0]).unwrap();
        assert!(r.per_seed.iter().all(|s| s.metrics.rmse == 0.0));
        assert_eq!(r.per_seed.len(), 3);
        assert!(r.mean.corr.is_none());
    }

    #[test]
    fn rejects_bad_configuration() {
        let d = constant(4);
        let p = Hyperparams::default();
        assert!(matches!(cross_validate(&d, &p, 5, &[0], &[0]), Err(Error::Pipeline(PipelineError::InvalidFolds { k: 5, n: 4 }))));
        assert!(matches!(cross_validate(&d, &p, 1, &[0], &[0]), Err(Error::Pipeline(PipelineError::InvalidFolds { .. }))));
        assert!(matches!(cross_validate(&d, &p, 2, &[0], &[]), Err(Error::Pipeline(PipelineError::NoFeatures))));
        assert!(matches!(cross_validate(&d, &p, 2, &[], &[0]), Err(Error::Pipeline(PipelineError::NoSeeds))));
        assert!(matches!(cross_validate(&d, &p, 2, &[0], &[3]), Err(Error::Pipeline(PipelineError::FeatureOutOfRange(3)))));
    }

    proptest! {
        #[test]
        fn folds_partition_rows(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let folds = fold_assignment(n, k, seed);
            prop_assert_eq!(folds.len(), k);
            let mut seen = alloc::vec![0u8; n];
            for f in &folds {
                for &r in f {
                    seen[r] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
