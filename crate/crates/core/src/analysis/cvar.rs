//! Discrete CVaR by sorting. The Rockafellar–Uryasev function
//! `F(z) = z + 1/(1-α) Σ π max(Q - z, 0)` is piecewise linear and convex in
//! `z` with a minimizer at the α-quantile of the cost distribution, so
//! evaluating it there gives CVaR exactly.

use crate::error::AnalysisError;

fn check(values: &[f64], probabilities: &[f64], alpha: f64) -> Result<(), AnalysisError> {
    if !(alpha < 1.0) {
        return Err(AnalysisError::AlphaOne);
    }
    if values.len() != probabilities.len() || values.is_empty() {
        return Err(AnalysisError::LengthMismatch { values: values.len(), probabilities: probabilities.len() });
    }
    Ok(())
}

/// `F(z)` from the definition, for any `z`.
pub fn rockafellar_uryasev(values: &[f64], probabilities: &[f64], alpha: f64, z: f64) -> f64 {
    let tail: f64 = values.iter().zip(probabilities).map(|(q, p)| p * (q - z).max(0.0)).sum();
    z + tail / (1.0 - alpha)
}

/// Smallest cost `z` with `P(Q <= z) >= α`.
pub fn value_at_risk(values: &[f64], probabilities: &[f64], alpha: f64) -> Result<f64, AnalysisError> {
    check(values, probabilities, alpha)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut cumulative = 0.0;
    for &i in &order {
        cumulative += probabilities[i];
        if cumulative >= alpha {
            return Ok(values[i]);
        }
    }
    Ok(values[*order.last().expect("non-empty")])
}

pub fn discrete_cvar(values: &[f64], probabilities: &[f64], alpha: f64) -> Result<f64, AnalysisError> {
    let z = value_at_risk(values, probabilities, alpha)?;
    Ok(rockafellar_uryasev(values, probabilities, alpha, z))
}

pub fn expectation(values: &[f64], probabilities: &[f64]) -> f64 {
    values.iter().zip(probabilities).map(|(q, p)| q * p).sum()
}
