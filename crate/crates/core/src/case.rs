//! Case files: one JSON document holding the facility, scenarios, risk
//! settings and solver options. Study overrides live here too.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capex::{annuity_coefficient, total_capital_cost, CapexCurve};
use crate::error::CaseError;
use crate::model::{validate_facility, Facility, Plant, Process, Product, RiskConfig, ValidationReport};
use crate::scenario::{ingest_price_csv, uniform_probabilities, ScenarioSet};
use crate::solver::{Backend, SolverOptions};

pub const DEFAULT_SEGMENTS: usize = 8;

/// Annual cost of capacity that an override pinned in place. The optimizer no
/// longer sees this investment, so reports list it separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedCharge {
    pub plant_id: String,
    pub capacity: f64,
    pub initial_capacity: f64,
    /// Dollars per year.
    pub annual_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseFile {
    pub name: String,
    pub facility: Facility,
    pub scenarios: ScenarioSet,
    pub risk: RiskConfig,
    pub segments: usize,
    pub solver: SolverOptions,
    pub fixed_charges: Vec<FixedCharge>,
}

impl CaseFile {
    pub fn validate(&self) -> ValidationReport {
        let mut r = validate_facility(&self.facility, Some(&self.scenarios));
        r.merge(self.scenarios.validate(&self.facility));
        if let Err(e) = self.risk.check() {
            r.error("risk", e);
        }
        if self.segments < 1 {
            r.error("solver", "segments must be at least 1");
        }
        if let Err(e) = self.solver.check() {
            r.error("solver", e);
        }
        r
    }

    pub fn fixed_charge_total(&self) -> f64 {
        self.fixed_charges.iter().map(|f| f.annual_cost).sum()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDocument {
    #[serde(default)]
    name: String,
    products: Vec<Product>,
    processes: Vec<Process>,
    plants: Vec<Plant>,
    #[serde(default)]
    scenarios: Option<ScenariosDocument>,
    #[serde(default)]
    risk: Option<RiskDocument>,
    #[serde(default)]
    solver: Option<SolverDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fixed_charges: Vec<FixedCharge>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenariosDocument {
    /// Path to a price table, relative to the case file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    price_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probabilities: Option<Vec<f64>>,
    #[serde(default)]
    prices: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    availabilities: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RiskDocument {
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    alpha: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDocument {
    #[serde(default)]
    segments: Option<usize>,
    #[serde(default)]
    feasibility_tolerance: Option<f64>,
    #[serde(default)]
    optimality_tolerance: Option<f64>,
    #[serde(default)]
    max_enumeration: Option<u64>,
    #[serde(default)]
    workers: Option<usize>,
    #[serde(default)]
    backend: Option<Backend>,
}

/// Parses a case document. `base_dir` resolves relative price-table paths.
pub fn parse_case(text: &str, base_dir: &Path) -> Result<CaseFile, CaseError> {
    let doc: CaseDocument = serde_json::from_str(text).map_err(|e| CaseError::Parse(e.to_string()))?;
    let facility = Facility { products: doc.products, processes: doc.processes, plants: doc.plants };
    let scenarios = resolve_scenarios(doc.scenarios.unwrap_or_default(), base_dir)?;
    let defaults = RiskConfig::default();
    let risk = doc.risk.map_or(defaults, |r| RiskConfig {
        lambda: r.lambda.unwrap_or(defaults.lambda),
        alpha: r.alpha.unwrap_or(defaults.alpha),
    });
    let s = doc.solver.unwrap_or_default();
    let d = SolverOptions::default();
    let solver = SolverOptions {
        feasibility_tolerance: s.feasibility_tolerance.unwrap_or(d.feasibility_tolerance),
        optimality_tolerance: s.optimality_tolerance.unwrap_or(d.optimality_tolerance),
        max_enumeration: s.max_enumeration.unwrap_or(d.max_enumeration),
        workers: s.workers.unwrap_or(d.workers),
        backend: s.backend.unwrap_or(d.backend),
    };
    let case = CaseFile {
        name: doc.name,
        facility,
        scenarios,
        risk,
        segments: s.segments.unwrap_or(DEFAULT_SEGMENTS),
        solver,
        fixed_charges: doc.fixed_charges,
    };
    let report = case.validate();
    if !report.is_ok() {
        return Err(CaseError::Validation(report));
    }
    Ok(case)
}

fn resolve_scenarios(doc: ScenariosDocument, base_dir: &Path) -> Result<ScenarioSet, CaseError> {
    let mut prices = BTreeMap::new();
    if let Some(rel) = &doc.price_csv {
        let path = base_dir.join(rel);
        let file = fs::File::open(&path).map_err(|e| CaseError::io(&path, e))?;
        prices = ingest_price_csv(file, &[])?.prices;
    }
    for (id, v) in doc.prices {
        if prices.insert(id.clone(), v).is_some() {
            return Err(CaseError::Parse(format!("prices for '{id}' given both inline and in the price table")));
        }
    }
    let n = doc
        .probabilities
        .as_ref()
        .map(Vec::len)
        .or_else(|| prices.values().next().map(Vec::len))
        .or_else(|| doc.availabilities.values().next().map(Vec::len))
        .unwrap_or(1);
    if n == 0 {
        return Err(CaseError::Parse("scenario set is empty".into()));
    }
    Ok(ScenarioSet {
        probabilities: doc.probabilities.unwrap_or_else(|| uniform_probabilities(n)),
        prices,
        availabilities: doc.availabilities,
    })
}

pub fn load_case(path: impl AsRef<Path>) -> Result<CaseFile, CaseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CaseError::io(path, e))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_case(&text, dir)
}

/// Serializes with scenarios inlined, so the result is self-contained.
pub fn case_to_json(case: &CaseFile) -> String {
    let doc = CaseDocument {
        name: case.name.clone(),
        products: case.facility.products.clone(),
        processes: case.facility.processes.clone(),
        plants: case.facility.plants.clone(),
        scenarios: Some(ScenariosDocument {
            price_csv: None,
            probabilities: Some(case.scenarios.probabilities.clone()),
            prices: case.scenarios.prices.clone(),
            availabilities: case.scenarios.availabilities.clone(),
        }),
        risk: Some(RiskDocument { lambda: Some(case.risk.lambda), alpha: Some(case.risk.alpha) }),
        solver: Some(SolverDocument {
            segments: Some(case.segments),
            feasibility_tolerance: Some(case.solver.feasibility_tolerance),
            optimality_tolerance: Some(case.solver.optimality_tolerance),
            max_enumeration: Some(case.solver.max_enumeration),
            workers: Some(case.solver.workers),
            backend: Some(case.solver.backend),
        }),
        fixed_charges: case.fixed_charges.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("case serializes");
    s.push('\n');
    s
}

pub fn save_case(case: &CaseFile, path: impl AsRef<Path>) -> Result<(), CaseError> {
    let path = path.as_ref();
    fs::write(path, case_to_json(case)).map_err(|e| CaseError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputScale {
    pub process: String,
    pub product: String,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Plant id to capacity, in the plant's capacity units.
    #[serde(default)]
    pub fixed_capacities: BTreeMap<String, f64>,
    /// Product id to a price used in every scenario.
    #[serde(default)]
    pub price_overrides: BTreeMap<String, f64>,
    #[serde(default)]
    pub process_output_scale: Vec<OutputScale>,
}

pub fn load_overrides(path: impl AsRef<Path>) -> Result<Overrides, CaseError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CaseError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CaseError::Parse(e.to_string()))
}

/// Returns a modified copy. A fixed capacity pins the plant (initial = max),
/// and the annuity of growing it from its original size becomes a fixed charge.
pub fn apply_overrides(case: &CaseFile, o: &Overrides) -> Result<CaseFile, CaseError> {
    let mut out = case.clone();
    for (id, &capacity) in &o.fixed_capacities {
        let k = out
            .facility
            .plant_position(id)
            .ok_or_else(|| CaseError::Override(format!("unknown plant '{id}'")))?;
        let plant = &mut out.facility.plants[k];
        if !(capacity >= plant.initial_capacity && capacity <= plant.max_capacity) {
            return Err(CaseError::Override(format!(
                "capacity {capacity} for plant '{id}' outside [{}, {}]",
                plant.initial_capacity, plant.max_capacity
            )));
        }
        let curve = CapexCurve::for_plant(plant).map_err(|e| CaseError::Override(e.to_string()))?;
        let scale = plant.capacity_unit_scale;
        let grown = total_capital_cost(&curve, capacity * scale).and_then(|hi| {
            let lo = total_capital_cost(&curve, curve.c0)?;
            let phi = annuity_coefficient(plant.discount_rate, plant.lifetime_years)?;
            Ok(phi * (hi - lo))
        });
        let annual_cost = grown.map_err(|e| CaseError::Override(e.to_string()))?;
        out.fixed_charges.push(FixedCharge {
            plant_id: id.clone(),
            capacity,
            initial_capacity: plant.initial_capacity,
            annual_cost,
        });
        plant.initial_capacity = capacity;
        plant.max_capacity = capacity;
    }
    let n = out.scenarios.len();
    for (id, &price) in &o.price_overrides {
        let product = out
            .facility
            .products
            .iter_mut()
            .find(|p| &p.id == id)
            .ok_or_else(|| CaseError::Override(format!("unknown product '{id}'")))?;
        if !(price.is_finite() && price >= 0.0) {
            return Err(CaseError::Override(format!("price {price} for '{id}' must be >= 0")));
        }
        product.base_price = price;
        out.scenarios.prices.insert(id.clone(), vec![price; n]);
    }
    for s in &o.process_output_scale {
        if !(s.factor.is_finite() && s.factor > 0.0) {
            return Err(CaseError::Override(format!("output scale {} must be > 0", s.factor)));
        }
        let process = out
            .facility
            .processes
            .iter_mut()
            .find(|p| p.id == s.process)
            .ok_or_else(|| CaseError::Override(format!("unknown process '{}'", s.process)))?;
        let theta = process
            .outputs
            .get_mut(&s.product)
            .ok_or_else(|| CaseError::Override(format!("process '{}' has no output '{}'", s.process, s.product)))?;
        *theta *= s.factor;
    }
    Ok(out)
}
