//! Production-chain data model: products, processes, plants, and the
//! structural checks run before anything is optimized.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioSet;

pub const DEFAULT_SCALE_EXPONENT: f64 = 0.7;

fn default_true() -> bool {
    true
}

fn default_sigma() -> f64 {
    DEFAULT_SCALE_EXPONENT
}

fn default_unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Product {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub unit: String,
    #[serde(default = "default_true")]
    pub sellable: bool,
    #[serde(default)]
    pub base_price: f64,
    #[serde(default)]
    pub initial_availability: f64,
}

/// A process turns inputs into outputs in fixed proportions. Its production
/// level is measured so that `level * inputs[reference_product]` is the
/// capacity it consumes in its plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Process {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub plant_id: String,
    /// Operating cost per base unit of the reference product.
    pub opex_per_ref_unit: f64,
    pub inputs: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, f64>,
    pub reference_product: String,
}

impl Process {
    /// Proportion of the reference input, i.e. capacity used per unit of level.
    pub fn reference_proportion(&self) -> f64 {
        self.inputs.get(&self.reference_product).copied().unwrap_or(f64::NAN)
    }

    /// Operating cost per unit of production level.
    pub fn level_cost(&self) -> f64 {
        self.opex_per_ref_unit * self.reference_proportion()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plant {
    pub id: String,
    #[serde(default)]
    pub name: String,
    /// Label for capacity figures, e.g. "kt of Bagasse".
    #[serde(default)]
    pub capacity_unit: String,
    pub initial_capacity: f64,
    /// Base product units per capacity unit (1000 for kt when products are in t).
    #[serde(default = "default_unit_scale")]
    pub capacity_unit_scale: f64,
    /// MM$ at `reference_capacity`.
    pub reference_capex: f64,
    pub reference_capacity: f64,
    #[serde(default = "default_sigma")]
    pub scale_exponent: f64,
    pub lifetime_years: u32,
    pub discount_rate: f64,
    pub max_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    pub lambda: f64,
    pub alpha: f64,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig { lambda: 0.0, alpha: 0.9 }
    }
}

impl RiskConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(format!("lambda {} outside [0, 1]", self.lambda));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(format!("alpha {} outside [0, 1)", self.alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Facility {
    pub products: Vec<Product>,
    pub processes: Vec<Process>,
    pub plants: Vec<Plant>,
}

impl Facility {
    pub fn product_position(&self, id: &str) -> Option<usize> {
        self.products.iter().position(|p| p.id == id)
    }

    pub fn process_position(&self, id: &str) -> Option<usize> {
        self.processes.iter().position(|p| p.id == id)
    }

    pub fn plant_position(&self, id: &str) -> Option<usize> {
        self.plants.iter().position(|p| p.id == id)
    }

    pub fn product(&self, id: &str) -> Option<&Product> {
        self.products.iter().find(|p| p.id == id)
    }

    pub fn plant(&self, id: &str) -> Option<&Plant> {
        self.plants.iter().find(|p| p.id == id)
    }

    pub fn process(&self, id: &str) -> Option<&Process> {
        self.processes.iter().find(|p| p.id == id)
    }
}

/// Cross-index tables. All lists hold positions into the facility vectors and
/// keep facility order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessIndex {
    pub processes_of_plant: Vec<Vec<usize>>,
    pub consumers_of_product: Vec<Vec<usize>>,
    pub producers_of_product: Vec<Vec<usize>>,
    /// Plant position per process.
    pub plant_of_process: Vec<usize>,
}

/// Builds the cross-indices. Dangling references are skipped, so callers
/// should validate first.
pub fn index_processes(f: &Facility) -> ProcessIndex {
    let product_pos: HashMap<&str, usize> =
        f.products.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let plant_pos: HashMap<&str, usize> =
        f.plants.iter().enumerate().map(|(k, p)| (p.id.as_str(), k)).collect();
    let mut idx = ProcessIndex {
        processes_of_plant: vec![Vec::new(); f.plants.len()],
        consumers_of_product: vec![Vec::new(); f.products.len()],
        producers_of_product: vec![Vec::new(); f.products.len()],
        plant_of_process: Vec::with_capacity(f.processes.len()),
    };
    for (j, proc_) in f.processes.iter().enumerate() {
        let k = plant_pos.get(proc_.plant_id.as_str()).copied().unwrap_or(usize::MAX);
        if k != usize::MAX {
            idx.processes_of_plant[k].push(j);
        }
        idx.plant_of_process.push(k);
        for id in proc_.inputs.keys() {
            if let Some(&i) = product_pos.get(id.as_str()) {
                idx.consumers_of_product[i].push(j);
            }
        }
        for id in proc_.outputs.keys() {
            if let Some(&i) = product_pos.get(id.as_str()) {
                idx.producers_of_product[i].push(j);
            }
        }
    }
    idx
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    /// What the finding is about, e.g. `process 'fast_pyrolysis'`.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn is_ok(&self) -> bool {
        self.error_count() == 0
    }

    pub fn error(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Error,
            subject: subject.into(),
            message: message.into(),
        });
    }

    pub fn warn(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            subject: subject.into(),
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        write!(
            f,
            "{} error(s), {} warning(s)",
            self.error_count(),
            self.warnings().count()
        )
    }
}

/// Identifiers end up as MPS names and CSV headers, so they must be plain
/// printable ASCII without whitespace.
pub fn check_identifier(id: &str) -> Result<(), String> {
    if id.is_empty() {
        return Err("empty identifier".into());
    }
    if let Some(c) = id.chars().find(|c| !c.is_ascii_graphic()) {
        return Err(format!("identifier '{id}' contains {c:?}"));
    }
    Ok(())
}

/// Structural checks. `scenarios`, when given, is used for the price-coverage
/// warning; otherwise product base prices are inspected.
pub fn validate_facility(f: &Facility, scenarios: Option<&ScenarioSet>) -> ValidationReport {
    let mut r = ValidationReport::default();

    if f.products.is_empty() {
        r.error("facility", "no products defined");
    }
    check_unique(&mut r, "product", f.products.iter().map(|p| p.id.as_str()));
    check_unique(&mut r, "process", f.processes.iter().map(|p| p.id.as_str()));
    check_unique(&mut r, "plant", f.plants.iter().map(|p| p.id.as_str()));

    for p in &f.products {
        let subject = format!("product '{}'", p.id);
        if let Err(e) = check_identifier(&p.id) {
            r.error(&subject, e);
        }
        if !(p.initial_availability.is_finite() && p.initial_availability >= 0.0) {
            r.error(&subject, format!("initial availability {} must be >= 0", p.initial_availability));
        }
        if !(p.base_price.is_finite() && p.base_price >= 0.0) {
            r.error(&subject, format!("base price {} must be >= 0", p.base_price));
        }
    }

    let products: BTreeSet<&str> = f.products.iter().map(|p| p.id.as_str()).collect();
    let plants: BTreeSet<&str> = f.plants.iter().map(|p| p.id.as_str()).collect();

    for j in &f.processes {
        let subject = format!("process '{}'", j.id);
        if let Err(e) = check_identifier(&j.id) {
            r.error(&subject, e);
        }
        if !plants.contains(j.plant_id.as_str()) {
            r.error(&subject, format!("unknown plant '{}'", j.plant_id));
        }
        if !j.opex_per_ref_unit.is_finite() {
            r.error(&subject, "opex must be finite");
        }
        for (side, map) in [("input", &j.inputs), ("output", &j.outputs)] {
            for (id, &theta) in map {
                if !products.contains(id.as_str()) {
                    r.error(&subject, format!("unknown product '{id}' in {side}s"));
                }
                if !(theta.is_finite() && theta > 0.0) {
                    r.error(&subject, format!("{side} proportion for '{id}' must be > 0, got {theta}"));
                }
            }
        }
        for id in j.inputs.keys().filter(|id| j.outputs.contains_key(*id)) {
            r.error(&subject, format!("product '{id}' is both input and output"));
        }
        if !j.inputs.contains_key(&j.reference_product) {
            if products.contains(j.reference_product.as_str()) {
                r.error(
                    &subject,
                    format!("reference must be an input: '{}' is not consumed", j.reference_product),
                );
            } else {
                r.error(&subject, format!("unknown product '{}' as reference", j.reference_product));
            }
        }
    }

    let index = index_processes(f);
    for (k, plant) in f.plants.iter().enumerate() {
        let subject = format!("plant '{}'", plant.id);
        if let Err(e) = check_identifier(&plant.id) {
            r.error(&subject, e);
        }
        let finite = [
            plant.initial_capacity,
            plant.capacity_unit_scale,
            plant.reference_capex,
            plant.reference_capacity,
            plant.scale_exponent,
            plant.discount_rate,
            plant.max_capacity,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            r.error(&subject, "numeric fields must be finite");
            continue;
        }
        if plant.reference_capacity <= 0.0 {
            r.error(&subject, "reference capacity must be > 0");
        }
        if plant.reference_capex < 0.0 {
            r.error(&subject, "reference capex must be >= 0");
        }
        if !(plant.scale_exponent > 0.0 && plant.scale_exponent <= 1.0) {
            r.error(&subject, format!("scale exponent {} outside (0, 1]", plant.scale_exponent));
        }
        if plant.initial_capacity < 0.0 {
            r.error(&subject, "initial capacity must be >= 0");
        }
        if plant.max_capacity < plant.initial_capacity {
            r.error(&subject, "max capacity below initial capacity");
        }
        if plant.capacity_unit_scale <= 0.0 {
            r.error(&subject, "capacity unit scale must be > 0");
        }
        if plant.lifetime_years < 1 {
            r.error(&subject, "lifetime must be at least one year");
        }
        if plant.discount_rate <= 0.0 {
            r.error(&subject, "discount rate must be > 0");
        }

        let members = &index.processes_of_plant[k];
        if members.is_empty() {
            r.warn(&subject, "no processes assigned");
        }
        let units: BTreeSet<&str> = members
            .iter()
            .filter_map(|&j| f.product(&f.processes[j].reference_product))
            .map(|p| p.unit.as_str())
            .collect();
        if units.len() > 1 {
            let list: Vec<&str> = units.into_iter().collect();
            r.warn(
                &subject,
                format!("reference products use different units ({}); capacity use is not comparable", list.join(", ")),
            );
        }
    }

    for p in f.products.iter().filter(|p| p.sellable) {
        let never_priced = match scenarios {
            Some(s) => (0..s.len()).all(|w| s.price(p, w) == 0.0),
            None => p.base_price == 0.0,
        };
        if never_priced {
            r.warn(format!("product '{}'", p.id), "sellable but priced at zero in every scenario");
        }
    }

    r
}

fn check_unique<'a>(r: &mut ValidationReport, kind: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            r.error(format!("{kind} '{id}'"), "duplicate id");
        }
    }
}
