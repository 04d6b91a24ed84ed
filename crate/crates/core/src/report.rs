//! Plain-text report with a JSON twin. Both are rendered from the same
//! rounded numbers (six decimals), so they agree digit for digit and repeat
//! byte for byte on identical input. Money is shown in MM$, volumes in the
//! base unit of each product.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::analysis::PlanSolution;
use crate::error::CaseError;

const MM: f64 = 1e6;

/// Rounds to six decimals and clears the sign of zero.
pub fn round6(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt6(v: f64) -> String {
    if v.is_finite() {
        format!("{:.6}", round6(v))
    } else {
        "n/a".to_string()
    }
}

fn num(v: f64) -> Value {
    let r = round6(v);
    if r.is_finite() {
        json!(r)
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub json: String,
}

struct MeanFlow {
    id: String,
    unit: String,
    production: f64,
    consumption: f64,
    sales: f64,
    disposal: f64,
}

fn mean_flows(plan: &PlanSolution) -> Vec<MeanFlow> {
    let Some(first) = plan.dispatch.scenarios.first() else {
        return Vec::new();
    };
    first
        .products
        .keys()
        .map(|id| {
            let avg = |f: &dyn Fn(&crate::analysis::ProductFlow) -> f64| {
                plan.dispatch.mean(|s| s.products.get(id).map_or(0.0, f))
            };
            MeanFlow {
                id: id.clone(),
                unit: plan.product_units.get(id).cloned().unwrap_or_default(),
                production: avg(&|p| p.production),
                consumption: avg(&|p| p.consumption),
                sales: avg(&|p| p.sales),
                disposal: avg(&|p| p.disposal),
            }
        })
        .collect()
}

pub fn render_report(plan: &PlanSolution) -> Report {
    let mut t = String::new();
    let mut doc = Map::new();
    let d = &plan.decomposition;

    let _ = writeln!(t, "capacity expansion plan: {}", plan.case_name);
    let _ = writeln!(t, "status {} ({}), objective {} MM$/yr", plan.status, plan.backend, fmt6(plan.objective / MM));
    let _ = writeln!(
        t,
        "lambda {}, alpha {}, segments {}",
        fmt6(plan.risk.lambda),
        fmt6(plan.risk.alpha),
        plan.segments
    );
    doc.insert("case".into(), json!(plan.case_name));
    doc.insert("status".into(), json!(plan.status.to_string()));
    doc.insert("backend".into(), json!(plan.backend));
    doc.insert("objective_mm".into(), num(plan.objective / MM));
    doc.insert("lambda".into(), num(plan.risk.lambda));
    doc.insert("alpha".into(), num(plan.risk.alpha));
    doc.insert("segments".into(), json!(plan.segments));

    t.push_str("\nobjective decomposition (MM$/yr)\n");
    let terms = [
        ("capex annuity", "capex_annuity", d.capex_annuity),
        ("lambda * CVaR", "weighted_cvar", d.weighted_cvar),
        ("(1 - lambda) * expected cost", "weighted_expected", d.weighted_expected),
        ("total", "total", d.total),
    ];
    let mut dec = Map::new();
    for (label, key, v) in terms {
        let _ = writeln!(t, "  {label:<32}{:>18}", fmt6(v / MM));
        dec.insert(key.into(), num(v / MM));
    }
    let _ = writeln!(t, "  {:<32}{:>18}", "CVaR of cost", fmt6(d.cvar / MM));
    let _ = writeln!(t, "  {:<32}{:>18}", "expected cost", fmt6(d.expected_cost / MM));
    dec.insert("cvar".into(), num(d.cvar / MM));
    dec.insert("expected_cost".into(), num(d.expected_cost / MM));
    doc.insert("objective_decomposition_mm".into(), Value::Object(dec));

    t.push_str("\ninvestment plan\n");
    let _ = writeln!(
        t,
        "  {:<28}{:>8}{:>16}{:>16}{:>16}{:>16}{:>18}",
        "plant", "unit", "initial", "capacity", "expansion", "capex MM$", "annuity MM$/yr"
    );
    let mut plants = Vec::new();
    for p in plan.plants.iter().filter(|p| round6(p.capacity) > 0.0) {
        let _ = writeln!(
            t,
            "  {:<28}{:>8}{:>16}{:>16}{:>16}{:>16}{:>18}",
            p.plant_id,
            p.capacity_unit,
            fmt6(p.initial_capacity),
            fmt6(p.capacity),
            fmt6(p.expansion),
            fmt6(p.capex / MM),
            fmt6(p.annualized_capex / MM)
        );
        plants.push(json!({
            "plant": p.plant_id,
            "unit": p.capacity_unit,
            "initial": num(p.initial_capacity),
            "capacity": num(p.capacity),
            "expansion": num(p.expansion),
            "capex_mm": num(p.capex / MM),
            "annuity_mm": num(p.annualized_capex / MM),
            "segment": p.segment,
        }));
    }
    doc.insert("plants".into(), Value::Array(plants));

    let mut fixed = Vec::new();
    if !plan.fixed_charges.is_empty() {
        t.push_str("\nfixed investments outside the optimization (MM$/yr)\n");
        for f in &plan.fixed_charges {
            let _ = writeln!(
                t,
                "  {:<28}capacity {:>14}  from {:>14}  annual {:>14}",
                f.plant_id,
                fmt6(f.capacity),
                fmt6(f.initial_capacity),
                fmt6(f.annual_cost / MM)
            );
            fixed.push(json!({
                "plant": f.plant_id,
                "capacity": num(f.capacity),
                "initial": num(f.initial_capacity),
                "annual_mm": num(f.annual_cost / MM),
            }));
        }
    }
    doc.insert("fixed_charges".into(), Value::Array(fixed));

    t.push_str("\nmean dispatch over scenarios (base units per year)\n");
    let _ = writeln!(
        t,
        "  {:<16}{:>8}{:>20}{:>20}{:>20}{:>20}",
        "product", "unit", "production", "consumption", "sales", "disposal"
    );
    let mut flows = Vec::new();
    for f in mean_flows(plan) {
        let vals = [f.production, f.consumption, f.sales, f.disposal];
        if vals.iter().all(|v| round6(*v) == 0.0) {
            continue;
        }
        let _ = writeln!(
            t,
            "  {:<16}{:>8}{:>20}{:>20}{:>20}{:>20}",
            f.id,
            f.unit,
            fmt6(f.production),
            fmt6(f.consumption),
            fmt6(f.sales),
            fmt6(f.disposal)
        );
        flows.push(json!({
            "product": f.id,
            "unit": f.unit,
            "production": num(f.production),
            "consumption": num(f.consumption),
            "sales": num(f.sales),
            "disposal": num(f.disposal),
        }));
    }
    doc.insert("mean_dispatch".into(), Value::Array(flows));

    t.push_str("\nmean process levels\n");
    let mut levels = Map::new();
    if let Some(first) = plan.dispatch.scenarios.first() {
        for id in first.levels.keys() {
            let v = plan.dispatch.mean(|s| s.levels.get(id).copied().unwrap_or(0.0));
            if round6(v) == 0.0 {
                continue;
            }
            let _ = writeln!(t, "  {id:<32}{:>20}", fmt6(v));
            levels.insert(id.clone(), num(v));
        }
    }
    doc.insert("mean_process_levels".into(), Value::Object(levels));

    let failed: Vec<usize> = plan.dispatch.failures().map(|s| s.scenario).collect();
    match &plan.dispatch.risk {
        Some(r) => {
            let _ = writeln!(t, "\nrisk metrics at alpha {} (MM$/yr)", fmt6(r.alpha));
            let rows = [
                ("expected cost E[Q]", "expected_cost", r.expected_cost / MM),
                ("value at risk", "value_at_risk", r.value_at_risk / MM),
                ("CVaR", "cvar", r.cvar / MM),
                ("annualized investment", "annualized_investment", r.capex_annuity / MM),
                ("operating margin mean", "operating_margin_mean", r.mean_operating_margin / MM),
                ("operating margin min", "operating_margin_min", r.min_operating_margin / MM),
                ("operating margin max", "operating_margin_max", r.max_operating_margin / MM),
                ("net revenue mean", "net_revenue_mean", r.mean_net_revenue / MM),
                ("net revenue min", "net_revenue_min", r.min_net_revenue / MM),
                ("net revenue max", "net_revenue_max", r.max_net_revenue / MM),
                ("loss probability", "loss_probability", r.loss_probability),
            ];
            let mut risk = Map::new();
            for (label, key, v) in rows {
                let _ = writeln!(t, "  {label:<32}{:>18}", fmt6(v));
                risk.insert(key.into(), num(v));
            }
            doc.insert("risk_mm".into(), Value::Object(risk));
        }
        None => {
            let _ = writeln!(t, "\nrisk metrics unavailable: dispatch failed in scenarios {failed:?}");
            doc.insert("risk_mm".into(), Value::Null);
        }
    }
    doc.insert("failed_scenarios".into(), json!(failed));

    t.push_str("\nscenario costs Q (MM$/yr)\n");
    let mut costs = Vec::new();
    for s in &plan.dispatch.scenarios {
        let _ = writeln!(t, "  s{:<8}{:>18}", s.scenario, fmt6(s.cost / MM));
        costs.push(num(s.cost / MM));
    }
    doc.insert("scenario_costs_mm".into(), Value::Array(costs));

    let mut json = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
    json.push('\n');
    Report { text: t, json }
}

/// Writes `report.txt` and `report.json` into `dir`.
pub fn write_report(
    plan: &PlanSolution,
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf), CaseError> {
    let dir = dir.as_ref();
    let r = render_report(plan);
    let text_path = dir.join("report.txt");
    let json_path = dir.join("report.json");
    fs::write(&text_path, r.text).map_err(|e| CaseError::io(&text_path, e))?;
    fs::write(&json_path, r.json).map_err(|e| CaseError::io(&json_path, e))?;
    Ok((text_path, json_path))
}
