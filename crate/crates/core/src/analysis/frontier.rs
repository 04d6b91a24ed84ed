//! Mean/CVaR trade-off by sweeping the risk weight.
//!
//! Costs here include the annualized investment. CVaR is translation
//! invariant, so the objective equals `(1-λ) E[total] + λ CVaR[total]` and
//! the usual exchange argument makes both terms monotone in λ.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::plan::{solve_case, ObjectiveDecomposition, PlanSolution};
use crate::case::CaseFile;
use crate::error::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub lambda: f64,
    /// Expected annual cost including annualized investment.
    pub expected: f64,
    /// CVaR of annual cost including annualized investment.
    pub cvar: f64,
    pub loss_probability: f64,
    pub objective: f64,
    pub decomposition: ObjectiveDecomposition,
    /// Capacity per plant, capacity units.
    pub capacities: BTreeMap<String, f64>,
}

/// Allowed slack when checking monotonicity, relative to the values compared.
pub const FRONTIER_REL_TOL: f64 = 1e-6;

fn point(lambda: f64, plan: &PlanSolution) -> Result<FrontierPoint, AnalysisError> {
    let risk = plan
        .dispatch
        .risk
        .as_ref()
        .ok_or_else(|| AnalysisError::Solver(crate::error::SolverError::Backend("dispatch failed".into())))?;
    let annual = risk.capex_annuity;
    Ok(FrontierPoint {
        lambda,
        expected: risk.expected_cost + annual,
        cvar: risk.cvar + annual,
        loss_probability: risk.loss_probability,
        objective: plan.objective,
        decomposition: plan.decomposition,
        capacities: plan.plants.iter().map(|p| (p.plant_id.clone(), p.capacity)).collect(),
    })
}

pub fn check_frontier(points: &[FrontierPoint]) -> Result<(), AnalysisError> {
    for pair in points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let slack = |x: f64, y: f64| FRONTIER_REL_TOL * x.abs().max(y.abs()).max(1.0);
        if b.cvar > a.cvar + slack(a.cvar, b.cvar) {
            return Err(AnalysisError::FrontierNotMonotone(format!(
                "CVaR rises from {} at lambda {} to {} at lambda {}",
                a.cvar, a.lambda, b.cvar, b.lambda
            )));
        }
        if b.expected < a.expected - slack(a.expected, b.expected) {
            return Err(AnalysisError::FrontierNotMonotone(format!(
                "expected cost falls from {} at lambda {} to {} at lambda {}",
                a.expected, a.lambda, b.expected, b.lambda
            )));
        }
    }
    Ok(())
}

/// Solves the case once per λ (sorted ascending, duplicates dropped) and
/// checks the frontier for monotonicity.
pub fn risk_frontier(case: &CaseFile, lambdas: &[f64]) -> Result<Vec<FrontierPoint>, AnalysisError> {
    if let Some(&bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(AnalysisError::LambdaOutOfRange(bad));
    }
    let mut grid = lambdas.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut points = Vec::with_capacity(grid.len());
    for lambda in grid {
        let mut c = case.clone();
        c.risk.lambda = lambda;
        points.push(point(lambda, &solve_case(&c)?)?);
    }
    check_frontier(&points)?;
    Ok(points)
}

pub fn frontier_csv(points: &[FrontierPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "expected", "cvar", "loss_prob"]).expect("in-memory write");
    for p in points {
        w.write_record([p.lambda, p.expected, p.cvar, p.loss_probability].map(|v| format!("{v:.6}")))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}
