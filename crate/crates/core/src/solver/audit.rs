//! Checks that do not trust the solver: constraint residuals recomputed from
//! the model rows, and a Lagrangian lower bound from row multipliers.

use std::fmt;

use crate::milp::{MilpModel, Sense, VarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    /// Row or variable name.
    pub name: String,
    pub what: &'static str,
    pub amount: f64,
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} '{}' violated by {:e}", self.what, self.name, self.amount)
    }
}

/// Verifies rows and bounds within `tol` relative to the magnitudes involved,
/// and integrality of binaries within 1e-9. Reports the largest relative
/// violation found.
pub fn feasibility_audit(model: &MilpModel, values: &[f64], tol: f64) -> Result<(), AuditViolation> {
    if values.len() != model.num_vars() {
        return Err(AuditViolation {
            name: model.name.clone(),
            what: "value count",
            amount: (values.len() as f64 - model.num_vars() as f64).abs(),
        });
    }
    let mut worst: Option<(f64, AuditViolation)> = None;
    let mut note = |rel: f64, v: AuditViolation| {
        if worst.as_ref().is_none_or(|(w, _)| rel > *w) {
            worst = Some((rel, v));
        }
    };
    for (var, &x) in model.variables().iter().zip(values) {
        if !x.is_finite() {
            note(f64::INFINITY, AuditViolation { name: var.name.clone(), what: "value of", amount: f64::INFINITY });
            continue;
        }
        let below = var.lower - x;
        let above = x - var.upper;
        for (gap, bound) in [(below, var.lower), (above, var.upper)] {
            let allowed = tol * bound.abs().max(1.0);
            if gap > allowed {
                note(gap / allowed, AuditViolation { name: var.name.clone(), what: "bound of", amount: gap });
            }
        }
        if var.kind == VarKind::Binary {
            let frac = (x - x.round()).abs();
            if frac > 1e-9 {
                note(frac / 1e-9, AuditViolation { name: var.name.clone(), what: "integrality of", amount: frac });
            }
        }
    }
    for row in model.constraints() {
        let mut activity = 0.0;
        let mut magnitude = row.rhs.abs().max(1.0);
        for &(v, a) in &row.terms {
            let t = a * values[v.0];
            activity += t;
            magnitude = magnitude.max(t.abs());
        }
        let gap = match row.sense {
            Sense::Le => activity - row.rhs,
            Sense::Ge => row.rhs - activity,
            Sense::Eq => (activity - row.rhs).abs(),
        };
        let allowed = tol * magnitude;
        if gap > allowed {
            note(gap / allowed, AuditViolation { name: row.name.clone(), what: "row", amount: gap });
        }
    }
    match worst {
        Some((_, v)) => Err(v),
        None => Ok(()),
    }
}

/// Lagrangian dual value `min_{x in box} c x - sum_i y_i (a_i x - b_i)` after
/// projecting `y` onto the sign pattern of the rows (`<=` rows take y <= 0,
/// `>=` rows y >= 0). It is a valid lower bound on every feasible objective.
pub fn lagrangian_bound(model: &MilpModel, duals: &[f64]) -> f64 {
    let y: Vec<f64> = model
        .constraints()
        .iter()
        .zip(duals)
        .map(|(row, &y)| match row.sense {
            Sense::Le => y.min(0.0),
            Sense::Ge => y.max(0.0),
            Sense::Eq => y,
        })
        .collect();
    let mut reduced: Vec<f64> = model.objective().to_vec();
    let mut scale: Vec<f64> = model.objective().iter().map(|c| c.abs().max(1.0)).collect();
    let mut bound = 0.0;
    for (row, &yi) in model.constraints().iter().zip(&y) {
        bound += yi * row.rhs;
        for &(v, a) in &row.terms {
            reduced[v.0] -= yi * a;
            scale[v.0] = scale[v.0].max((yi * a).abs());
        }
    }
    for (j, var) in model.variables().iter().enumerate() {
        let r = reduced[j];
        if r.abs() <= 1e-9 * scale[j] {
            // Numerically zero: contributes nothing even on an unbounded side.
            if var.lower.is_finite() && var.upper.is_finite() {
                bound += if r >= 0.0 { r * var.lower } else { r * var.upper };
            }
            continue;
        }
        let x = if r > 0.0 { var.lower } else { var.upper };
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        bound += r * x;
    }
    bound
}
