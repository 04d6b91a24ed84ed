//! Minimum viable price by bisection on a constant price override.

use serde::{Deserialize, Serialize};

use super::plan::{solve_extensive, ObjectiveDecomposition};
use crate::case::{apply_overrides, CaseFile, Overrides};
use crate::error::AnalysisError;

/// Relative threshold below which expansion or sales count as absent.
pub const VIABILITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViabilityCheck {
    pub price: f64,
    pub viable: bool,
    /// Expansion of the target plant, capacity units.
    pub expansion: f64,
    /// Probability-weighted sold volume of the target product, base units.
    pub mean_sales: f64,
    pub decomposition: ObjectiveDecomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub product: String,
    pub plant: String,
    /// Upper end of the final bracket: the lowest price known to be viable.
    pub price: f64,
    pub bracket: (f64, f64),
    pub trace: Vec<ViabilityCheck>,
}

/// Solves the case with `product` priced at `price` in every scenario and
/// reports whether the plan expands `plant` or sells the product.
pub fn viability_at(case: &CaseFile, product: &str, plant: &str, price: f64) -> Result<ViabilityCheck, AnalysisError> {
    let k = case
        .facility
        .plant_position(plant)
        .ok_or_else(|| AnalysisError::Unknown { kind: "plant", id: plant.to_string() })?;
    let i = case
        .facility
        .product_position(product)
        .ok_or_else(|| AnalysisError::Unknown { kind: "product", id: product.to_string() })?;
    let priced = apply_overrides(
        case,
        &Overrides { price_overrides: [(product.to_string(), price)].into(), ..Default::default() },
    )?;
    let (model, index, sol) = solve_extensive(&priced)?;
    let x = &sol.values;
    let p = &priced.facility.plants[k];
    let expansion_base = x[index.plants[k].y.0];
    let mut mean_sales = 0.0;
    let mut potential = 0.0;
    for (sv, pi) in index.scenarios.iter().zip(&priced.scenarios.probabilities) {
        let v = sv.sales[i];
        mean_sales += pi * x[v.0];
        potential += pi * model.var(v).upper;
    }
    let builds = expansion_base > VIABILITY_THRESHOLD * p.reference_capacity * p.capacity_unit_scale;
    let sells = potential > 0.0 && mean_sales > VIABILITY_THRESHOLD * potential;
    Ok(ViabilityCheck {
        price,
        viable: builds || sells,
        expansion: expansion_base / p.capacity_unit_scale,
        mean_sales,
        decomposition: ObjectiveDecomposition::from_values(&index, &priced.scenarios.probabilities, &priced.risk, x),
    })
}

/// Any price at which the plan is viable must not lie below one at which it
/// is not.
pub fn check_monotone(trace: &[ViabilityCheck]) -> Result<(), AnalysisError> {
    let mut sorted: Vec<&ViabilityCheck> = trace.iter().collect();
    sorted.sort_by(|a, b| a.price.total_cmp(&b.price));
    let first_viable = sorted.iter().position(|c| c.viable);
    if let Some(f) = first_viable {
        if let Some(bad) = sorted[f..].iter().find(|c| !c.viable) {
            return Err(AnalysisError::NonMonotone(format!(
                "viable at {} but not at the higher price {}",
                sorted[f].price, bad.price
            )));
        }
    }
    Ok(())
}

pub fn min_viable_price(
    case: &CaseFile,
    product: &str,
    plant: &str,
    bracket: (f64, f64),
    tol: f64,
) -> Result<SensitivityResult, AnalysisError> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(AnalysisError::BracketInvalid(format!("need 0 <= lo < hi, got ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(AnalysisError::BracketInvalid(format!("tolerance {tol} must be > 0")));
    }
    let mut trace = Vec::new();
    let at_lo = viability_at(case, product, plant, lo)?;
    let lo_viable = at_lo.viable;
    trace.push(at_lo);
    if lo_viable {
        return Err(AnalysisError::BracketInvalid(format!("already viable at the low end {lo}")));
    }
    let at_hi = viability_at(case, product, plant, hi)?;
    let hi_viable = at_hi.viable;
    trace.push(at_hi);
    if !hi_viable {
        return Err(AnalysisError::BracketInvalid(format!("not viable at the high end {hi}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let check = viability_at(case, product, plant, mid)?;
        if check.viable {
            hi = mid;
        } else {
            lo = mid;
        }
        trace.push(check);
    }
    check_monotone(&trace)?;
    Ok(SensitivityResult { product: product.to_string(), plant: plant.to_string(), price: hi, bracket: (lo, hi), trace })
}
