//! Discrete scenario sets for prices and initial availabilities.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::CaseError;
use crate::model::{Facility, Product, ValidationReport};

/// Products missing from `prices` / `availabilities` use their constant
/// `base_price` / `initial_availability` in every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSet {
    pub probabilities: Vec<f64>,
    #[serde(default)]
    pub prices: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub availabilities: BTreeMap<String, Vec<f64>>,
}

impl Default for ScenarioSet {
    fn default() -> Self {
        ScenarioSet::deterministic()
    }
}

/// `n` equal weights whose sum is exactly one: the last entry absorbs the
/// rounding residue.
pub fn uniform_probabilities(n: usize) -> Vec<f64> {
    assert!(n > 0);
    let p = 1.0 / n as f64;
    let mut v = vec![p; n];
    let head: f64 = v[..n - 1].iter().sum();
    v[n - 1] = 1.0 - head;
    v
}

impl ScenarioSet {
    pub fn deterministic() -> Self {
        ScenarioSet {
            probabilities: vec![1.0],
            prices: BTreeMap::new(),
            availabilities: BTreeMap::new(),
        }
    }

    pub fn uniform(n: usize) -> Self {
        ScenarioSet {
            probabilities: uniform_probabilities(n),
            prices: BTreeMap::new(),
            availabilities: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn price(&self, product: &Product, scenario: usize) -> f64 {
        match self.prices.get(&product.id) {
            Some(v) => v[scenario],
            None => product.base_price,
        }
    }

    pub fn availability(&self, product: &Product, scenario: usize) -> f64 {
        match self.availabilities.get(&product.id) {
            Some(v) => v[scenario],
            None => product.initial_availability,
        }
    }

    /// Keeps only the listed scenarios and renormalizes their weights.
    pub fn subset(&self, scenarios: &[usize]) -> ScenarioSet {
        let pick = |v: &Vec<f64>| scenarios.iter().map(|&w| v[w]).collect::<Vec<_>>();
        let mass: f64 = scenarios.iter().map(|&w| self.probabilities[w]).sum();
        let mut probabilities: Vec<f64> =
            scenarios.iter().map(|&w| self.probabilities[w] / mass).collect();
        let n = probabilities.len();
        if n > 0 {
            let head: f64 = probabilities[..n - 1].iter().sum();
            probabilities[n - 1] = 1.0 - head;
        }
        ScenarioSet {
            probabilities,
            prices: self.prices.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
            availabilities: self.availabilities.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
        }
    }

    /// Collapses to one scenario holding the probability-weighted mean of
    /// every listed series.
    pub fn mean(&self) -> ScenarioSet {
        let avg = |v: &Vec<f64>| vec![v.iter().zip(&self.probabilities).map(|(x, p)| x * p).sum::<f64>()];
        ScenarioSet {
            probabilities: vec![1.0],
            prices: self.prices.iter().map(|(k, v)| (k.clone(), avg(v))).collect(),
            availabilities: self.availabilities.iter().map(|(k, v)| (k.clone(), avg(v))).collect(),
        }
    }

    pub fn validate(&self, facility: &Facility) -> ValidationReport {
        let mut r = ValidationReport::default();
        let n = self.len();
        if n == 0 {
            r.error("scenarios", "at least one scenario is required");
            return r;
        }
        if self.probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            r.error("scenarios", "probabilities must be finite and >= 0");
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            r.error("scenarios", format!("probabilities sum to {total}, expected 1"));
        }
        for (kind, map) in [("prices", &self.prices), ("availabilities", &self.availabilities)] {
            for (id, v) in map {
                let subject = format!("scenario {kind} for '{id}'");
                if facility.product(id).is_none() {
                    r.error(&subject, format!("unknown product '{id}'"));
                }
                if v.len() != n {
                    r.error(&subject, format!("has {} entries, expected {n}", v.len()));
                }
                if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    r.error(&subject, "values must be finite and >= 0");
                }
            }
        }
        r
    }
}

/// Reads a price table with a header row of product ids and one row per
/// observation. Each row becomes one equally weighted joint scenario.
///
/// Only the listed columns are read; an empty list means every column.
/// Columns that are not listed (a date stamp, say) are ignored.
pub fn ingest_price_csv<R: Read>(csv_source: R, product_ids: &[&str]) -> Result<ScenarioSet, CaseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_source);
    let headers = reader.headers().map_err(|e| CaseError::Csv(e.to_string()))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CaseError::Csv("empty file".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for h in headers.iter() {
        if !seen.insert(h) {
            return Err(CaseError::Csv(format!("duplicate product column '{h}'")));
        }
    }
    let wanted: Vec<&str> = if product_ids.is_empty() {
        headers.iter().collect()
    } else {
        product_ids.to_vec()
    };
    let mut columns = Vec::with_capacity(wanted.len());
    for id in &wanted {
        match headers.iter().position(|h| h == *id) {
            Some(c) => columns.push(c),
            None => return Err(CaseError::Csv(format!("missing column for product '{id}'"))),
        }
    }

    let mut series: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CaseError::Csv(e.to_string()))?;
        for (s, &c) in columns.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| {
                CaseError::Csv(format!("row {}, column '{}': '{cell}' is not a number", row + 2, wanted[s]))
            })?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(CaseError::Csv(format!(
                    "row {}, column '{}': price must be finite and >= 0",
                    row + 2,
                    wanted[s]
                )));
            }
            series[s].push(value);
        }
    }
    let rows = series.first().map_or(0, Vec::len);
    if rows == 0 {
        return Err(CaseError::Csv("empty file: no observations".into()));
    }
    let mut set = ScenarioSet::uniform(rows);
    for (id, values) in wanted.into_iter().zip(series) {
        set.prices.insert(id.to_string(), values);
    }
    Ok(set)
}
