//! Shapley values by direct enumeration of every coalition.

use alloc::vec::Vec;

use super::expectation::{check_arity, ensemble_expectation};
use super::{Attribution, InteractionMatrix};
use crate::booster::Ensemble;
use crate::error::ExplainError;

/// Largest feature count the enumeration accepts (2^15 coalitions).
pub const MAX_ENUMERATED_FEATURES: usize = 15;

fn factorials(m: usize) -> Vec<f64> {
    let mut f = alloc::vec![1.0; m + 1];
    for i in 1..=m {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

fn coalition_values(m: &Ensemble, x: &[Option<f64>]) -> Result<Vec<f64>, ExplainError> {
    check_arity(m, x)?;
    let n = m.n_features();
    if n > MAX_ENUMERATED_FEATURES {
        return Err(ExplainError::TooManyFeatures { m: n, max: MAX_ENUMERATED_FEATURES });
    }
    Ok((0..1usize << n).map(|mask| ensemble_expectation(m, x, &|f| mask >> f & 1 == 1)).collect())
}

/// `phi[i] = Σ_{S ⊆ N∖{i}} |S|!(M-|S|-1)!/M! · (v(S ∪ {i}) - v(S))`.
pub fn brute_shap(m: &Ensemble, x: &[Option<f64>]) -> Result<Attribution, ExplainError> {
    let v = coalition_values(m, x)?;
    let n = m.n_features();
    let fact = factorials(n);
    let mut phi = alloc::vec![0.0; n];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        for mask in (0..v.len()).filter(|s| s & bit == 0) {
            let s = mask.count_ones() as usize;
            *p += fact[s] * fact[n - s - 1] / fact[n] * (v[mask | bit] - v[mask]);
        }
    }
    Ok(Attribution { base_value: v[0], phi, instance: x.to_vec() })
}

/// Pairwise Shapley interaction values by enumeration.
///
/// Off-diagonal cells hold half of the pair's interaction index,
/// `Σ_{S ⊆ N∖{i,j}} |S|!(M-|S|-2)!/(2(M-1)!) · ∇ij(S)` with
/// `∇ij(S) = v(S∪{i,j}) - v(S∪{i}) - v(S∪{j}) + v(S)`; the diagonal holds
/// `phi[i]` minus the rest of its row.
#[allow(clippy::needless_range_loop)]
pub fn brute_interactions(m: &Ensemble, x: &[Option<f64>]) -> Result<InteractionMatrix, ExplainError> {
    let v = coalition_values(m, x)?;
    let phi = brute_shap(m, x)?.phi;
    let n = m.n_features();
    let fact = factorials(n);
    let mut values = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (bi, bj) = (1usize << i, 1usize << j);
            let mut total = 0.0;
            for mask in (0..v.len()).filter(|s| s & (bi | bj) == 0) {
                let s = mask.count_ones() as usize;
                let w = fact[s] * fact[n - s - 2] / (2.0 * fact[n - 1]);
                total += w * (v[mask | bi | bj] - v[mask | bi] - v[mask | bj] + v[mask]);
            }
            values[i][j] = total;
        }
        values[i][i] = phi[i] - (0..n).filter(|&j| j != i).map(|j| values[i][j]).sum::<f64>();
    }
    Ok(InteractionMatrix { values })
}
