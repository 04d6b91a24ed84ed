//! Assembles the scenario-based extensive form and the standalone
//! second-stage dispatch LP.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capex::{annuity_coefficient, build_breakpoints_range_uniform, CapexCurve, PiecewiseApprox};
use crate::case::CaseFile;
use crate::error::BuildError;
use crate::milp::{MilpModel, RowId, Sense, VarId, VarKind};
use crate::model::{index_processes, Facility, ProcessIndex, RiskConfig};
use crate::scenario::ScenarioSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentVars {
    pub eta: VarId,
    pub w: VarId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantVars {
    pub plant_id: String,
    pub y: VarId,
    pub c: VarId,
    pub b: VarId,
    pub segments: Vec<SegmentVars>,
    /// The at-most-one-segment row, absent for no-build plants.
    pub sos_row: Option<RowId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioVars {
    /// Production level per process, in facility order.
    pub levels: Vec<VarId>,
    /// Sold volume per product, in facility order.
    pub sales: Vec<VarId>,
    pub q: VarId,
    pub delta: Option<VarId>,
}

/// Maps semantic decision symbols to model variables. Process flows are not
/// variables of their own: input and output flows are `level * proportion`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelIndex {
    pub plants: Vec<PlantVars>,
    pub scenarios: Vec<ScenarioVars>,
    pub z: Option<VarId>,
    pub process_ids: Vec<String>,
    pub product_ids: Vec<String>,
    /// Breakpoints (base units, dollars) per plant; empty for a dispatch LP.
    pub breakpoints: Vec<PiecewiseApprox>,
    /// Annuity coefficient per plant; empty for a dispatch LP.
    pub phi: Vec<f64>,
    /// Capacities in base units used by a dispatch LP; empty for the extensive form.
    pub fixed_capacities: Vec<f64>,
}

impl ModelIndex {
    /// Every variable the index knows about, in no particular order.
    pub fn all_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for p in &self.plants {
            out.extend([p.y, p.c, p.b]);
            for s in &p.segments {
                out.extend([s.eta, s.w]);
            }
        }
        out.extend(self.z);
        for s in &self.scenarios {
            out.extend(&s.levels);
            out.extend(&s.sales);
            out.push(s.q);
            out.extend(s.delta);
        }
        out
    }

    /// Segment whose binary is set, per plant. Binaries are read with a 0.5
    /// threshold; callers that need strict integrality check it separately.
    pub fn active_segments(&self, values: &[f64]) -> Vec<Option<usize>> {
        self.plants
            .iter()
            .map(|p| p.segments.iter().position(|s| values[s.eta.0] > 0.5))
            .collect()
    }

    /// Position of the active segment's interpolation weight, γ = w when η = 1.
    pub fn gammas(&self, values: &[f64]) -> Vec<Option<f64>> {
        self.plants
            .iter()
            .zip(self.active_segments(values))
            .map(|(p, seg)| seg.map(|s| values[p.segments[s].w.0]))
            .collect()
    }

    pub fn flow_in(&self, facility: &Facility, values: &[f64], scenario: usize, process: usize, product: &str) -> f64 {
        let theta = facility.processes[process].inputs.get(product).copied().unwrap_or(0.0);
        theta * values[self.scenarios[scenario].levels[process].0]
    }

    pub fn flow_out(&self, facility: &Facility, values: &[f64], scenario: usize, process: usize, product: &str) -> f64 {
        let theta = facility.processes[process].outputs.get(product).copied().unwrap_or(0.0);
        theta * values[self.scenarios[scenario].levels[process].0]
    }
}

pub fn phi_coefficients(facility: &Facility) -> Result<BTreeMap<String, f64>, BuildError> {
    facility
        .plants
        .iter()
        .map(|p| Ok((p.id.clone(), annuity_coefficient(p.discount_rate, p.lifetime_years)?)))
        .collect()
}

/// Range-uniform breakpoints per plant; plants that cannot grow get the
/// single-point no-build set.
pub fn plant_breakpoints(facility: &Facility, segments: usize) -> Result<Vec<PiecewiseApprox>, BuildError> {
    facility
        .plants
        .iter()
        .map(|p| {
            let curve = CapexCurve::for_plant(p)?;
            if curve.c_max > curve.c0 {
                Ok(build_breakpoints_range_uniform(&curve, segments)?)
            } else {
                Ok(PiecewiseApprox::no_build(curve.c0))
            }
        })
        .collect()
}

pub fn build_extensive_form(case: &CaseFile) -> Result<(MilpModel, ModelIndex), BuildError> {
    let breakpoints = plant_breakpoints(&case.facility, case.segments)?;
    build_extensive_form_with(&case.facility, &case.scenarios, &case.risk, &breakpoints)
}

pub fn build_extensive_form_with(
    facility: &Facility,
    scenarios: &ScenarioSet,
    risk: &RiskConfig,
    breakpoints: &[PiecewiseApprox],
) -> Result<(MilpModel, ModelIndex), BuildError> {
    if risk.alpha >= 1.0 {
        return Err(BuildError::AlphaOne);
    }
    risk.check().map_err(BuildError::Risk)?;
    if breakpoints.len() != facility.plants.len() {
        let missing = facility.plants.get(breakpoints.len()).map_or("?", |p| p.id.as_str());
        return Err(BuildError::MissingBreakpoints(missing.to_string()));
    }
    if let Some(k) = breakpoints.iter().position(|b| b.breakpoints.is_empty()) {
        return Err(BuildError::MissingBreakpoints(facility.plants[k].id.clone()));
    }
    let phi_map = phi_coefficients(facility)?;
    let phi: Vec<f64> = facility.plants.iter().map(|p| phi_map[&p.id]).collect();
    let pidx = index_processes(facility);

    let mut m = MilpModel::new("capacity_expansion");
    let mut plants = Vec::with_capacity(facility.plants.len());
    for (k, plant) in facility.plants.iter().enumerate() {
        let bp = &breakpoints[k];
        let c0 = bp.first().capacity;
        let top = bp.last();
        let id = &plant.id;
        let y = m.add_var(format!("y_{id}"), 0.0, top.capacity - c0, VarKind::Continuous)?;
        let c = m.add_var(format!("c_{id}"), c0, top.capacity, VarKind::Continuous)?;
        let b = m.add_var(format!("b_{id}"), 0.0, top.cost, VarKind::Continuous)?;
        m.set_objective(b, phi[k]);
        let mut segments = Vec::with_capacity(bp.segments());
        for p in 1..=bp.segments() {
            let eta = m.add_var(format!("eta_{id}_{p}"), 0.0, 1.0, VarKind::Binary)?;
            segments.push(SegmentVars { eta, w: VarId(usize::MAX) });
        }
        for (p, seg) in segments.iter_mut().enumerate() {
            seg.w = m.add_var(format!("w_{id}_{}", p + 1), 0.0, 1.0, VarKind::Continuous)?;
        }
        plants.push(PlantVars { plant_id: id.clone(), y, c, b, segments, sos_row: None });
    }

    let z = m.add_var("z", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous)?;
    m.set_objective(z, risk.lambda);

    for (k, plant) in facility.plants.iter().enumerate() {
        let pv = &plants[k];
        let bp = &breakpoints[k].breakpoints;
        let id = &plant.id;
        m.add_constraint(format!("link_{id}"), vec![(pv.c, 1.0), (pv.y, -1.0)], Sense::Eq, bp[0].capacity)?;
        if pv.segments.is_empty() {
            continue;
        }
        // c = sum_p (w_p c_p + (eta_p - w_p) c_{p+1}), likewise for b.
        let mut cap_terms = vec![(pv.c, 1.0)];
        let mut cost_terms = vec![(pv.b, 1.0)];
        for (p, seg) in pv.segments.iter().enumerate() {
            let (lo, hi) = (bp[p], bp[p + 1]);
            cap_terms.push((seg.eta, -hi.capacity));
            cap_terms.push((seg.w, hi.capacity - lo.capacity));
            cost_terms.push((seg.eta, -hi.cost));
            cost_terms.push((seg.w, hi.cost - lo.cost));
        }
        m.add_constraint(format!("pic_{id}"), cap_terms, Sense::Eq, 0.0)?;
        m.add_constraint(format!("pib_{id}"), cost_terms, Sense::Eq, 0.0)?;
        let sos = pv.segments.iter().map(|s| (s.eta, 1.0)).collect();
        let row = m.add_constraint(format!("sos_{id}"), sos, Sense::Le, 1.0)?;
        plants[k].sos_row = Some(row);
        for (p, seg) in plants[k].segments.iter().enumerate() {
            m.add_constraint(format!("wle_{id}_{}", p + 1), vec![(seg.w, 1.0), (seg.eta, -1.0)], Sense::Le, 0.0)?;
        }
    }

    let max_caps: Vec<f64> = breakpoints.iter().map(|b| b.last().capacity).collect();
    let capacity_terms = |k: usize| Capacity::Variable(plants[k].c);
    let mut scen_vars = Vec::with_capacity(scenarios.len());
    let bounds = ScenarioBounds::new(facility, &pidx, &max_caps, scenarios)?;
    for w in 0..scenarios.len() {
        let tag = format!("s{w}");
        let sv = add_scenario_block(&mut m, facility, &pidx, scenarios, w, &tag, &bounds, &capacity_terms)?;
        let pi = scenarios.probabilities[w];
        m.set_objective(sv.q, (1.0 - risk.lambda) * pi);
        let delta_ub = bounds.q_hi[w] - bounds.q_lo_min;
        let delta = m.add_var(format!("delta_{tag}"), 0.0, delta_ub.max(0.0), VarKind::Continuous)?;
        m.set_objective(delta, risk.lambda * pi / (1.0 - risk.alpha));
        m.add_constraint(format!("cvar_{tag}"), vec![(z, 1.0), (delta, 1.0), (sv.q, -1.0)], Sense::Ge, 0.0)?;
        scen_vars.push(ScenarioVars { delta: Some(delta), ..sv });
    }

    let index = ModelIndex {
        plants,
        scenarios: scen_vars,
        z: Some(z),
        process_ids: facility.processes.iter().map(|p| p.id.clone()).collect(),
        product_ids: facility.products.iter().map(|p| p.id.clone()).collect(),
        breakpoints: breakpoints.to_vec(),
        phi,
        fixed_capacities: Vec::new(),
    };
    Ok((m, index))
}

/// Dispatch LP of one scenario for given plant capacities (capacity units,
/// facility order). The objective is the net cost `Q`.
pub fn build_second_stage_lp(
    facility: &Facility,
    capacities: &[f64],
    scenarios: &ScenarioSet,
    scenario: usize,
) -> Result<(MilpModel, ModelIndex), BuildError> {
    if capacities.len() != facility.plants.len() {
        return Err(BuildError::CapacityCount { got: capacities.len(), expected: facility.plants.len() });
    }
    if scenario >= scenarios.len() {
        return Err(BuildError::UnknownScenario(scenario));
    }
    let mut base_caps = Vec::with_capacity(capacities.len());
    for (plant, &c) in facility.plants.iter().zip(capacities) {
        let slack = 1e-9 * plant.max_capacity.abs().max(1.0);
        if !(c >= plant.initial_capacity - slack) {
            return Err(BuildError::CapacityBelowInitial {
                plant: plant.id.clone(),
                capacity: c,
                initial: plant.initial_capacity,
            });
        }
        if c > plant.max_capacity + slack {
            return Err(BuildError::CapacityAboveMax { plant: plant.id.clone(), capacity: c, max: plant.max_capacity });
        }
        base_caps.push(c.max(0.0) * plant.capacity_unit_scale);
    }
    let pidx = index_processes(facility);
    let single = scenarios.subset(&[scenario]);
    let bounds = ScenarioBounds::new(facility, &pidx, &base_caps, &single)?;
    let mut m = MilpModel::new("dispatch");
    let capacity_terms = |k: usize| Capacity::Fixed(base_caps[k]);
    let sv = add_scenario_block(&mut m, facility, &pidx, &single, 0, "s0", &bounds, &capacity_terms)?;
    m.set_objective(sv.q, 1.0);
    let index = ModelIndex {
        plants: Vec::new(),
        scenarios: vec![sv],
        z: None,
        process_ids: facility.processes.iter().map(|p| p.id.clone()).collect(),
        product_ids: facility.products.iter().map(|p| p.id.clone()).collect(),
        breakpoints: Vec::new(),
        phi: Vec::new(),
        fixed_capacities: base_caps,
    };
    Ok((m, index))
}

enum Capacity {
    Variable(VarId),
    Fixed(f64),
}

/// Variable bounds implied by the largest capacities, shared by all blocks.
struct ScenarioBounds {
    level_ub: Vec<f64>,
    sales_ub: Vec<Vec<f64>>,
    q_lo: Vec<f64>,
    q_hi: Vec<f64>,
    q_lo_min: f64,
}

impl ScenarioBounds {
    fn new(facility: &Facility, pidx: &ProcessIndex, caps: &[f64], scenarios: &ScenarioSet) -> Result<Self, BuildError> {
        let level_ub: Vec<f64> = facility
            .processes
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let k = pidx.plant_of_process[j];
                caps[k] / p.reference_proportion()
            })
            .collect();
        let mut sales_ub = Vec::with_capacity(scenarios.len());
        let mut q_lo = Vec::with_capacity(scenarios.len());
        let mut q_hi = Vec::with_capacity(scenarios.len());
        let (mut opex_lo, mut opex_hi) = (0.0, 0.0);
        for (j, p) in facility.processes.iter().enumerate() {
            let cost = p.level_cost() * level_ub[j];
            opex_lo += cost.min(0.0);
            opex_hi += cost.max(0.0);
        }
        for w in 0..scenarios.len() {
            let mut ub = Vec::with_capacity(facility.products.len());
            let mut revenue = 0.0;
            for (i, prod) in facility.products.iter().enumerate() {
                let price = price_of(scenarios, facility, i, w)?;
                if !prod.sellable {
                    ub.push(0.0);
                    continue;
                }
                let produced: f64 = pidx.producers_of_product[i]
                    .iter()
                    .map(|&j| facility.processes[j].outputs[&prod.id] * level_ub[j])
                    .sum();
                let v = scenarios.availability(prod, w) + produced;
                revenue += price * v;
                ub.push(v);
            }
            sales_ub.push(ub);
            q_lo.push(opex_lo - revenue);
            q_hi.push(opex_hi);
        }
        let q_lo_min = q_lo.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(ScenarioBounds { level_ub, sales_ub, q_lo, q_hi, q_lo_min })
    }
}

fn price_of(scenarios: &ScenarioSet, facility: &Facility, i: usize, w: usize) -> Result<f64, BuildError> {
    let prod = &facility.products[i];
    match scenarios.prices.get(&prod.id) {
        Some(v) if w < v.len() => Ok(v[w]),
        Some(_) => Err(BuildError::MissingPrice { product: prod.id.clone(), scenario: w }),
        None => Ok(prod.base_price),
    }
}

#[allow(clippy::too_many_arguments)]
fn add_scenario_block(
    m: &mut MilpModel,
    facility: &Facility,
    pidx: &ProcessIndex,
    scenarios: &ScenarioSet,
    w: usize,
    tag: &str,
    bounds: &ScenarioBounds,
    capacity: &dyn Fn(usize) -> Capacity,
) -> Result<ScenarioVars, BuildError> {
    let mut levels = Vec::with_capacity(facility.processes.len());
    for (j, p) in facility.processes.iter().enumerate() {
        levels.push(m.add_var(format!("l_{}_{tag}", p.id), 0.0, bounds.level_ub[j], VarKind::Continuous)?);
    }
    let mut sales = Vec::with_capacity(facility.products.len());
    for (i, p) in facility.products.iter().enumerate() {
        sales.push(m.add_var(format!("v_{}_{tag}", p.id), 0.0, bounds.sales_ub[w][i], VarKind::Continuous)?);
    }
    let q = m.add_var(format!("Q_{tag}"), bounds.q_lo[w], bounds.q_hi[w], VarKind::Continuous)?;

    // Sales plus net consumption cannot exceed what is initially available.
    for (i, prod) in facility.products.iter().enumerate() {
        let mut terms = vec![(sales[i], 1.0)];
        for &j in &pidx.consumers_of_product[i] {
            terms.push((levels[j], facility.processes[j].inputs[&prod.id]));
        }
        for &j in &pidx.producers_of_product[i] {
            terms.push((levels[j], -facility.processes[j].outputs[&prod.id]));
        }
        m.add_constraint(format!("bal_{}_{tag}", prod.id), terms, Sense::Le, scenarios.availability(prod, w))?;
    }

    for (k, plant) in facility.plants.iter().enumerate() {
        let members = &pidx.processes_of_plant[k];
        if members.is_empty() {
            continue;
        }
        let mut terms: Vec<(VarId, f64)> =
            members.iter().map(|&j| (levels[j], facility.processes[j].reference_proportion())).collect();
        let rhs = match capacity(k) {
            Capacity::Variable(c) => {
                terms.push((c, -1.0));
                0.0
            }
            Capacity::Fixed(c) => c,
        };
        m.add_constraint(format!("cap_{}_{tag}", plant.id), terms, Sense::Le, rhs)?;
    }

    let mut terms = vec![(q, 1.0)];
    for (j, p) in facility.processes.iter().enumerate() {
        let cost = p.level_cost();
        if cost != 0.0 {
            terms.push((levels[j], -cost));
        }
    }
    for (i, prod) in facility.products.iter().enumerate() {
        let price = price_of(scenarios, facility, i, w)?;
        if prod.sellable && price != 0.0 {
            terms.push((sales[i], price));
        }
    }
    m.add_constraint(format!("qdef_{tag}"), terms, Sense::Eq, 0.0)?;

    Ok(ScenarioVars { levels, sales, q, delta: None })
}
