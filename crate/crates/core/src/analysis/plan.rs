//! Turning a solved extensive form into an investment plan with its
//! dispatch and risk profile.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dispatch::{evaluate_dispatch, DispatchReport};
use crate::case::{CaseFile, FixedCharge};
use crate::error::AnalysisError;
use crate::milp::MilpModel;
use crate::model::RiskConfig;
use crate::program::{build_extensive_form, ModelIndex};
use crate::solver::{solve, MilpSolution, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantDecision {
    pub plant_id: String,
    pub name: String,
    pub capacity_unit: String,
    /// Capacities in the plant's capacity units.
    pub initial_capacity: f64,
    pub capacity: f64,
    pub expansion: f64,
    /// Piecewise expansion cost, dollars.
    pub capex: f64,
    pub annuity_coefficient: f64,
    /// Dollars per year.
    pub annualized_capex: f64,
    pub segment: Option<usize>,
    pub gamma: Option<f64>,
}

/// The three objective terms, read off the solved model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveDecomposition {
    pub capex_annuity: f64,
    /// `z + 1/(1-α) Σ π δ` at the optimum.
    pub cvar: f64,
    pub expected_cost: f64,
    pub weighted_cvar: f64,
    pub weighted_expected: f64,
    pub total: f64,
}

impl ObjectiveDecomposition {
    pub fn from_values(index: &ModelIndex, scenarios_prob: &[f64], risk: &RiskConfig, x: &[f64]) -> Self {
        let capex_annuity: f64 = index.plants.iter().zip(&index.phi).map(|(p, phi)| phi * x[p.b.0]).sum();
        let z = index.z.map_or(0.0, |z| x[z.0]);
        let mut tail = 0.0;
        let mut expected = 0.0;
        for (sv, p) in index.scenarios.iter().zip(scenarios_prob) {
            expected += p * x[sv.q.0];
            if let Some(d) = sv.delta {
                tail += p * x[d.0];
            }
        }
        let cvar = z + tail / (1.0 - risk.alpha);
        let weighted_cvar = risk.lambda * cvar;
        let weighted_expected = (1.0 - risk.lambda) * expected;
        ObjectiveDecomposition {
            capex_annuity,
            cvar,
            expected_cost: expected,
            weighted_cvar,
            weighted_expected,
            total: capex_annuity + weighted_cvar + weighted_expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub case_name: String,
    pub status: Status,
    pub backend: String,
    pub objective: f64,
    pub risk: RiskConfig,
    pub segments: usize,
    pub plants: Vec<PlantDecision>,
    pub decomposition: ObjectiveDecomposition,
    /// Pinned investments from overrides, charged outside the optimization.
    pub fixed_charges: Vec<FixedCharge>,
    /// Unit label per product id.
    pub product_units: BTreeMap<String, String>,
    /// Dispatch re-solved scenario by scenario at the chosen capacities.
    pub dispatch: DispatchReport,
}

impl PlanSolution {
    pub fn capex_annuity(&self) -> f64 {
        self.decomposition.capex_annuity
    }

    pub fn fixed_charge_total(&self) -> f64 {
        self.fixed_charges.iter().map(|f| f.annual_cost).sum()
    }

    /// Capacities in capacity units, facility order.
    pub fn capacities(&self) -> Vec<f64> {
        self.plants.iter().map(|p| p.capacity).collect()
    }

    pub fn plant(&self, id: &str) -> Option<&PlantDecision> {
        self.plants.iter().find(|p| p.plant_id == id)
    }
}

/// Builds and solves the extensive form of a case.
pub fn solve_extensive(case: &CaseFile) -> Result<(MilpModel, ModelIndex, MilpSolution), AnalysisError> {
    let (model, index) = build_extensive_form(case)?;
    let sol = solve(&model, &index, &case.solver)?;
    if !sol.is_optimal() {
        return Err(AnalysisError::NotOptimal(sol.status));
    }
    Ok((model, index, sol))
}

/// Capacity of every plant in capacity units, clamped into its domain.
pub fn plan_capacities(case: &CaseFile, index: &ModelIndex, x: &[f64]) -> Vec<f64> {
    case.facility
        .plants
        .iter()
        .zip(&index.plants)
        .map(|(plant, pv)| (x[pv.c.0] / plant.capacity_unit_scale).clamp(plant.initial_capacity, plant.max_capacity))
        .collect()
}

pub fn assemble_plan(
    case: &CaseFile,
    index: &ModelIndex,
    sol: &MilpSolution,
) -> Result<PlanSolution, AnalysisError> {
    let x = &sol.values;
    let capacities = plan_capacities(case, index, x);
    let gammas = index.gammas(x);
    let plants = case
        .facility
        .plants
        .iter()
        .zip(&index.plants)
        .enumerate()
        .map(|(k, (plant, pv))| {
            let capex = x[pv.b.0];
            PlantDecision {
                plant_id: plant.id.clone(),
                name: plant.name.clone(),
                capacity_unit: plant.capacity_unit.clone(),
                initial_capacity: plant.initial_capacity,
                capacity: capacities[k],
                expansion: (capacities[k] - plant.initial_capacity).max(0.0),
                capex,
                annuity_coefficient: index.phi[k],
                annualized_capex: index.phi[k] * capex,
                segment: sol.active_segments.get(k).copied().flatten(),
                gamma: gammas[k],
            }
        })
        .collect();
    let decomposition = ObjectiveDecomposition::from_values(index, &case.scenarios.probabilities, &case.risk, x);
    let annual = decomposition.capex_annuity + case.fixed_charge_total();
    let dispatch =
        evaluate_dispatch(&case.facility, &capacities, &case.scenarios, case.risk.alpha, annual, &case.solver)?;
    Ok(PlanSolution {
        case_name: case.name.clone(),
        status: sol.status,
        backend: sol.backend.clone(),
        objective: sol.objective,
        risk: case.risk,
        segments: case.segments,
        plants,
        decomposition,
        fixed_charges: case.fixed_charges.clone(),
        product_units: case.facility.products.iter().map(|p| (p.id.clone(), p.unit.clone())).collect(),
        dispatch,
    })
}

pub fn solve_case(case: &CaseFile) -> Result<PlanSolution, AnalysisError> {
    let (_, index, sol) = solve_extensive(case)?;
    assemble_plan(case, &index, &sol)
}
