//! Scenario-by-scenario dispatch at fixed capacities, with product balances
//! and the risk summary of the resulting costs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cvar::{discrete_cvar, expectation, value_at_risk};
use crate::error::AnalysisError;
use crate::model::Facility;
use crate::program::build_second_stage_lp;
use crate::scenario::ScenarioSet;
use crate::solver::{solve_lp, SolverOptions, Status};

/// Balance of one product in one scenario, base units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductFlow {
    pub available: f64,
    pub production: f64,
    pub consumption: f64,
    pub sales: f64,
    /// Surplus that is neither consumed nor sold.
    pub disposal: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDispatch {
    pub scenario: usize,
    pub probability: f64,
    pub status: Status,
    /// Net cost: operating cost minus sales revenue.
    pub cost: f64,
    pub revenue: f64,
    pub operating_cost: f64,
    pub levels: BTreeMap<String, f64>,
    pub products: BTreeMap<String, ProductFlow>,
}

/// Risk metrics of a cost distribution. Operating margin is `-Q`; net
/// revenue additionally subtracts the annualized investment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub alpha: f64,
    pub expected_cost: f64,
    pub value_at_risk: f64,
    pub cvar: f64,
    pub capex_annuity: f64,
    pub mean_operating_margin: f64,
    pub min_operating_margin: f64,
    pub max_operating_margin: f64,
    pub mean_net_revenue: f64,
    pub min_net_revenue: f64,
    pub max_net_revenue: f64,
    /// Probability mass of scenarios whose net revenue is negative.
    pub loss_probability: f64,
    pub costs: Vec<f64>,
}

impl RiskReport {
    pub fn from_costs(costs: &[f64], probabilities: &[f64], alpha: f64, capex_annuity: f64) -> Result<Self, AnalysisError> {
        let cvar = discrete_cvar(costs, probabilities, alpha)?;
        let var = value_at_risk(costs, probabilities, alpha)?;
        let expected = expectation(costs, probabilities);
        let min_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let max_cost = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let loss: f64 = costs
            .iter()
            .zip(probabilities)
            .filter(|(q, _)| -**q - capex_annuity < 0.0)
            .map(|(_, p)| p)
            .sum();
        Ok(RiskReport {
            alpha,
            expected_cost: expected,
            value_at_risk: var,
            cvar,
            capex_annuity,
            mean_operating_margin: -expected,
            min_operating_margin: -max_cost,
            max_operating_margin: -min_cost,
            mean_net_revenue: -expected - capex_annuity,
            min_net_revenue: -max_cost - capex_annuity,
            max_net_revenue: -min_cost - capex_annuity,
            loss_probability: loss.clamp(0.0, 1.0),
            costs: costs.to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchReport {
    pub scenarios: Vec<ScenarioDispatch>,
    /// Absent when some scenario failed to solve.
    pub risk: Option<RiskReport>,
}

impl DispatchReport {
    pub fn failures(&self) -> impl Iterator<Item = &ScenarioDispatch> {
        self.scenarios.iter().filter(|s| s.status != Status::Optimal)
    }

    /// Probability-weighted mean of a per-scenario quantity.
    pub fn mean(&self, f: impl Fn(&ScenarioDispatch) -> f64) -> f64 {
        self.scenarios.iter().map(|s| s.probability * f(s)).sum()
    }
}

/// Solves the dispatch LP of one scenario at capacities given in capacity units.
pub fn dispatch_scenario(
    facility: &Facility,
    capacities: &[f64],
    scenarios: &ScenarioSet,
    w: usize,
    options: &SolverOptions,
) -> Result<ScenarioDispatch, AnalysisError> {
    let (model, index) = build_second_stage_lp(facility, capacities, scenarios, w)?;
    let sol = solve_lp(&model, options)?;
    let mut out = ScenarioDispatch {
        scenario: w,
        probability: scenarios.probabilities[w],
        status: sol.status,
        cost: f64::NAN,
        revenue: f64::NAN,
        operating_cost: f64::NAN,
        levels: BTreeMap::new(),
        products: BTreeMap::new(),
    };
    if !sol.is_optimal() {
        return Ok(out);
    }
    let x = &sol.values;
    let sv = &index.scenarios[0];
    let mut operating_cost = 0.0;
    for (j, p) in facility.processes.iter().enumerate() {
        let level = x[sv.levels[j].0];
        operating_cost += p.level_cost() * level;
        out.levels.insert(p.id.clone(), level);
    }
    let mut revenue = 0.0;
    for (i, prod) in facility.products.iter().enumerate() {
        let mut production = 0.0;
        let mut consumption = 0.0;
        for j in 0..facility.processes.len() {
            production += index.flow_out(facility, x, 0, j, &prod.id);
            consumption += index.flow_in(facility, x, 0, j, &prod.id);
        }
        let sales = x[sv.sales[i].0];
        let price = scenarios.price(prod, w);
        if prod.sellable {
            revenue += price * sales;
        }
        let available = scenarios.availability(prod, w);
        out.products.insert(
            prod.id.clone(),
            ProductFlow {
                available,
                production,
                consumption,
                sales,
                disposal: available + production - consumption - sales,
                price,
            },
        );
    }
    out.cost = x[sv.q.0];
    out.revenue = revenue;
    out.operating_cost = operating_cost;
    Ok(out)
}

/// Dispatch of every scenario at fixed capacities (capacity units). A
/// scenario whose LP fails is reported with its status and no risk summary
/// is formed.
pub fn evaluate_dispatch(
    facility: &Facility,
    capacities: &[f64],
    scenarios: &ScenarioSet,
    alpha: f64,
    capex_annuity: f64,
    options: &SolverOptions,
) -> Result<DispatchReport, AnalysisError> {
    let mut out = Vec::with_capacity(scenarios.len());
    for w in 0..scenarios.len() {
        out.push(dispatch_scenario(facility, capacities, scenarios, w, options)?);
    }
    let risk = if out.iter().all(|s| s.status == Status::Optimal) {
        let costs: Vec<f64> = out.iter().map(|s| s.cost).collect();
        Some(RiskReport::from_costs(&costs, &scenarios.probabilities, alpha, capex_annuity)?)
    } else {
        None
    };
    Ok(DispatchReport { scenarios: out, risk })
}
