//! Fixtures shared by the integration tests: small random facilities and an
//! oracle that solves the two-stage problem without going through the model
//! builder. It enumerates one segment per plant and hands each choice to
//! HiGHS as an LP written straight from the facility data.

#![allow(dead_code)]

use std::collections::BTreeMap;

use biocap::case::CaseFile;
use biocap::model::{Facility, Plant, Process, Product, RiskConfig};
use biocap::program::plant_breakpoints;
use biocap::scenario::ScenarioSet;
use biocap::solver::{Backend, SolverOptions};
use highs::{HighsModelStatus, RowProblem, Sense};
use rand::Rng;

pub struct Shape {
    pub max_plants: usize,
    pub max_segments: usize,
    pub max_scenarios: usize,
}

fn product(id: &str, sellable: bool, price: f64, available: f64) -> Product {
    Product {
        id: id.into(),
        name: String::new(),
        unit: "t".into(),
        sellable,
        base_price: price,
        initial_availability: available,
    }
}

fn process(id: String, plant: &str, opex: f64, input: (&str, f64), outputs: &[(&str, f64)]) -> Process {
    Process {
        id,
        name: String::new(),
        plant_id: plant.into(),
        opex_per_ref_unit: opex,
        inputs: [(input.0.to_string(), input.1)].into(),
        outputs: outputs.iter().map(|(p, a)| (p.to_string(), *a)).collect(),
        reference_product: input.0.into(),
    }
}

/// Two feeds, an intermediate and two final products. Feeds are turned into
/// the intermediate or a final product; the intermediate is upgraded further.
pub fn random_case(rng: &mut impl Rng, shape: &Shape) -> CaseFile {
    let products = vec![
        product("feed_a", false, 0.0, 80.0),
        product("feed_b", false, 0.0, 60.0),
        product("mid", true, 10.0, 0.0),
        product("prod_x", true, 50.0, 0.0),
        product("prod_y", true, 70.0, 0.0),
    ];
    let n_plants = rng.gen_range(1..=shape.max_plants);
    let mut plants = Vec::new();
    let mut processes = Vec::new();
    for k in 0..n_plants {
        let id = format!("k{k}");
        let initial = if rng.gen_bool(0.6) { 0.0 } else { rng.gen_range(5.0..20.0) };
        plants.push(Plant {
            id: id.clone(),
            name: String::new(),
            capacity_unit: "t".into(),
            initial_capacity: initial,
            capacity_unit_scale: 1.0,
            reference_capex: rng.gen_range(0.002..0.03),
            reference_capacity: rng.gen_range(20.0..80.0),
            scale_exponent: rng.gen_range(0.5..0.95),
            lifetime_years: rng.gen_range(10..=25),
            discount_rate: rng.gen_range(0.05..0.15),
            max_capacity: initial + rng.gen_range(30.0..100.0),
        });
        for j in 0..rng.gen_range(1..=2) {
            let pid = format!("p{k}_{j}");
            let opex = rng.gen_range(1.0..8.0);
            let p = if rng.gen_bool(0.65) {
                let feed = if rng.gen_bool(0.5) { "feed_a" } else { "feed_b" };
                let mut outs = vec![("mid", rng.gen_range(0.5..1.0))];
                if rng.gen_bool(0.5) {
                    outs.push(("prod_x", rng.gen_range(0.1..0.6)));
                }
                process(pid, &id, opex, (feed, rng.gen_range(1.0..2.0)), &outs)
            } else {
                let mut outs = vec![("prod_y", rng.gen_range(0.6..1.2))];
                if rng.gen_bool(0.3) {
                    outs.push(("prod_x", rng.gen_range(0.1..0.4)));
                }
                process(pid, &id, opex, ("mid", 1.0), &outs)
            };
            processes.push(p);
        }
    }
    let n = rng.gen_range(1..=shape.max_scenarios);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probabilities[..n - 1].iter().sum();
    probabilities[n - 1] = 1.0 - head;
    let mut prices = BTreeMap::new();
    for (id, lo, hi) in [("mid", 2.0, 20.0), ("prod_x", 20.0, 90.0), ("prod_y", 30.0, 110.0)] {
        prices.insert(id.to_string(), (0..n).map(|_| rng.gen_range(lo..hi)).collect());
    }
    let mut availabilities = BTreeMap::new();
    availabilities.insert("feed_a".to_string(), (0..n).map(|_| rng.gen_range(40.0..120.0)).collect());
    let case = CaseFile {
        name: "random".into(),
        facility: Facility { products, processes, plants },
        scenarios: ScenarioSet { probabilities, prices, availabilities },
        risk: RiskConfig { lambda: rng.gen_range(0.0..=1.0), alpha: rng.gen_range(0.5..0.95) },
        segments: rng.gen_range(1..=shape.max_segments),
        solver: SolverOptions { backend: Backend::Reference, ..SolverOptions::default() },
        fixed_charges: Vec::new(),
    };
    let report = case.validate();
    assert!(report.is_ok(), "generated case is invalid: {report}");
    case
}

fn price(case: &CaseFile, product: &Product, w: usize) -> f64 {
    case.scenarios.prices.get(&product.id).map_or(product.base_price, |v| v[w])
}

fn available(case: &CaseFile, product: &Product, w: usize) -> f64 {
    case.scenarios.availabilities.get(&product.id).map_or(product.initial_availability, |v| v[w])
}

/// Optimal objective by brute force: every combination of active segments
/// (one per expandable plant) is solved as an LP and the best value wins.
/// `None` when no combination is feasible.
pub fn oracle_objective(case: &CaseFile) -> Option<f64> {
    let f = &case.facility;
    let bps = plant_breakpoints(f, case.segments).expect("breakpoints");
    let radices: Vec<usize> = bps.iter().map(|b| b.segments().max(1)).collect();
    let total: usize = radices.iter().product();
    let mut best: Option<f64> = None;
    for id in 0..total {
        let mut rest = id;
        let choice: Vec<usize> = radices
            .iter()
            .map(|r| {
                let c = rest % r;
                rest /= r;
                c
            })
            .collect();
        if let Some(v) = combination_lp(case, &bps, &choice) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}

fn combination_lp(case: &CaseFile, bps: &[biocap::capex::PiecewiseApprox], choice: &[usize]) -> Option<f64> {
    let f = &case.facility;
    let RiskConfig { lambda, alpha } = case.risk;
    let mut pb = RowProblem::default();
    let mut constant = 0.0;
    // Capacity of plant k is lo + t_k (hi - lo) on its chosen segment.
    let mut seg = Vec::new();
    for (k, plant) in f.plants.iter().enumerate() {
        let phi = plant.discount_rate / (1.0 - (1.0 + plant.discount_rate).powf(-(plant.lifetime_years as f64)));
        let pts = &bps[k].breakpoints;
        if pts.len() == 1 {
            seg.push((pts[0].capacity, 0.0, None));
            continue;
        }
        let (lo, hi) = (pts[choice[k]], pts[choice[k] + 1]);
        constant += phi * lo.cost;
        let t = pb.add_column(phi * (hi.cost - lo.cost), 0.0..=1.0);
        seg.push((lo.capacity, hi.capacity - lo.capacity, Some(t)));
    }
    let z = pb.add_column(lambda, f64::NEG_INFINITY..=f64::INFINITY);
    for (w, &pi) in case.scenarios.probabilities.iter().enumerate() {
        let levels: Vec<_> = f
            .processes
            .iter()
            .map(|p| {
                let unit_cost = p.opex_per_ref_unit * p.inputs[&p.reference_product];
                (pb.add_column((1.0 - lambda) * pi * unit_cost, 0.0..), unit_cost)
            })
            .collect();
        let sales: Vec<_> = f
            .products
            .iter()
            .map(|prod| {
                let r = price(case, prod, w);
                let ub = if prod.sellable { f64::INFINITY } else { 0.0 };
                (pb.add_column(-(1.0 - lambda) * pi * r, 0.0..=ub), r)
            })
            .collect();
        let delta = pb.add_column(lambda * pi / (1.0 - alpha), 0.0..);
        for (i, prod) in f.products.iter().enumerate() {
            let mut row = vec![(sales[i].0, 1.0)];
            for (j, p) in f.processes.iter().enumerate() {
                let net = p.inputs.get(&prod.id).copied().unwrap_or(0.0) - p.outputs.get(&prod.id).copied().unwrap_or(0.0);
                if net != 0.0 {
                    row.push((levels[j].0, net));
                }
            }
            pb.add_row(..=available(case, prod, w), &row);
        }
        for (k, plant) in f.plants.iter().enumerate() {
            let mut row: Vec<_> = f
                .processes
                .iter()
                .enumerate()
                .filter(|(_, p)| p.plant_id == plant.id)
                .map(|(j, p)| (levels[j].0, p.inputs[&p.reference_product]))
                .collect();
            if row.is_empty() {
                continue;
            }
            let (base, width, t) = seg[k];
            if let Some(t) = t {
                row.push((t, -width));
            }
            pb.add_row(..=base, &row);
        }
        // delta >= Q - z, with Q = opex - revenue.
        let mut row = vec![(z, 1.0), (delta, 1.0)];
        row.extend(levels.iter().map(|&(l, c)| (l, -c)));
        row.extend(sales.iter().map(|&(v, r)| (v, r)));
        pb.add_row(0.0.., &row);
    }
    let mut model = pb.optimise(Sense::Minimise);
    model.make_quiet();
    let solved = model.solve();
    match solved.status() {
        HighsModelStatus::Optimal => Some(solved.objective_value() + constant),
        HighsModelStatus::Infeasible => None,
        other => panic!("oracle LP ended with {other:?}"),
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// One plant with linear capital cost turning a free feed into one product.
/// Building is worth it exactly when the price covers operating cost plus
/// the annualized capital cost per unit, which gives a closed-form break-even.
pub struct BreakEven {
    pub opex: f64,
    pub capex_mm: f64,
    pub reference_capacity: f64,
    pub rate: f64,
    pub years: u32,
    pub feed: f64,
}

impl BreakEven {
    pub fn price(&self) -> f64 {
        let phi = self.rate / (1.0 - (1.0 + self.rate).powi(-(self.years as i32)));
        self.opex + phi * self.capex_mm * 1e6 / self.reference_capacity
    }

    pub fn case(&self, price: f64) -> CaseFile {
        let case = CaseFile {
            name: "break_even".into(),
            facility: Facility {
                products: vec![product("feed", false, 0.0, self.feed), product("out", true, price, 0.0)],
                processes: vec![process("convert".into(), "mill", self.opex, ("feed", 1.0), &[("out", 1.0)])],
                plants: vec![Plant {
                    id: "mill".into(),
                    name: String::new(),
                    capacity_unit: "t".into(),
                    initial_capacity: 0.0,
                    capacity_unit_scale: 1.0,
                    reference_capex: self.capex_mm,
                    reference_capacity: self.reference_capacity,
                    scale_exponent: 1.0,
                    lifetime_years: self.years,
                    discount_rate: self.rate,
                    max_capacity: 2.0 * self.feed,
                }],
            },
            scenarios: ScenarioSet::deterministic(),
            risk: RiskConfig { lambda: 0.5, alpha: 0.9 },
            segments: 1,
            solver: SolverOptions { backend: Backend::Reference, ..SolverOptions::default() },
            fixed_charges: Vec::new(),
        };
        assert!(case.validate().is_ok());
        case
    }
}

pub const BREAK_EVEN: BreakEven =
    BreakEven { opex: 20.0, capex_mm: 0.5, reference_capacity: 100.0, rate: 0.1, years: 10, feed: 50.0 };
