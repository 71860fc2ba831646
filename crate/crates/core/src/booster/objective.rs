//! Closed-form pieces of the second-order boosting objective.

use crate::error::BoosterError;

/// Optimal leaf weight `-G / (H + lambda)` for gradient sum `G` and hessian sum `H`.
pub fn leaf_weight(grad_sum: f64, hess_sum: f64, reg_lambda: f64) -> Result<f64, BoosterError> {
    let denom = hess_sum + reg_lambda;
    if !(denom > 0.0) {
        return Err(BoosterError::NonPositiveDenominator(denom));
    }
    Ok(-grad_sum / denom)
}

/// Loss reduction of splitting a node into left and right children, minus the
/// per-leaf penalty `reg_gamma`. May be negative.
pub fn split_gain(grad_left: f64, hess_left: f64, grad_right: f64, hess_right: f64, reg_lambda: f64, reg_gamma: f64) -> Result<f64, BoosterError> {
    let dl = hess_left + reg_lambda;
    let dr = hess_right + reg_lambda;
    let dp = hess_left + hess_right + reg_lambda;
    for d in [dl, dr, dp] {
        if !(d > 0.0) {
            return Err(BoosterError::NonPositiveDenominator(d));
        }
    }
    let g = grad_left + grad_right;
    Ok(0.5 * (grad_left * grad_left / dl + grad_right * grad_right / dr - g * g / dp) - reg_gamma)
}
