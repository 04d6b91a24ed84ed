//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::{CString, OsString};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use biocap::analysis::{discrete_cvar, dispatch_scenario, risk_frontier, solve_extensive, ObjectiveDecomposition, ScenarioDispatch};
use biocap::capex::{
    build_breakpoints_domain_uniform, build_breakpoints_range_uniform, max_rel_error, total_capital_cost, CapexCurve,
};
use biocap::case::{apply_overrides, load_case, CaseFile, Overrides};
use biocap::milp::{MilpModel, Sense, VarKind};
use biocap::model::Facility;
use biocap::program::build_extensive_form;
use biocap::scenario::ScenarioSet;
use biocap::solver::{solve_reference_milp, Backend, SolverOptions};
use common::{oracle_objective, random_case, rel_diff, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn appendix_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases/appendix_case.json")
}

fn appendix() -> CaseFile {
    load_case(appendix_path()).expect("bundled case loads")
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

/// Capacities in capacity units: initial capacity everywhere except `set`.
fn capacities(f: &Facility, set: &[(&str, f64)]) -> Vec<f64> {
    f.plants
        .iter()
        .map(|p| set.iter().find(|(id, _)| *id == p.id).map_or(p.initial_capacity, |(_, c)| *c))
        .collect()
}

fn dispatch_once(f: &Facility, caps: &[f64]) -> Result<ScenarioDispatch, String> {
    let d = dispatch_scenario(f, caps, &ScenarioSet::deterministic(), 0, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    if d.status != biocap::solver::Status::Optimal {
        return Err(format!("dispatch ended {}", d.status));
    }
    Ok(d)
}

fn produced(d: &ScenarioDispatch, id: &str) -> f64 {
    d.products[id].production
}

fn consumed(d: &ScenarioDispatch, id: &str) -> f64 {
    d.products[id].consumption
}

fn scale_law() -> Verdict {
    let start = Instant::now();
    let curve = CapexCurve::new(196.6, 4.38, 0.7, 0.0, 100.0).map_err(|e| e.to_string())?;
    let g = |c: f64| total_capital_cost(&curve, c).expect("inside domain");
    let up = g(43.8) / g(4.38);
    let down = g(0.438) / g(4.38);
    let elapsed = start.elapsed();
    let detail = format!("g(10C)/g(C) = {up:.4}, g(0.1C)/g(C) = {down:.4}, {elapsed:?}");
    if (up - 5.012).abs() <= 0.01 && (down - 0.1995).abs() <= 0.001 && elapsed < Duration::from_millis(1) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Harvest, mill and bagasse-fired power plant at base prices. The power
/// plant's straw capacity exceeds what the bagasse supports, so bagasse binds.
fn mass_balance() -> Verdict {
    let start = Instant::now();
    let case = appendix();
    let f = &case.facility;
    let caps = capacities(f, &[("electricity_from_residues", 250.0)]);
    let d = dispatch_once(f, &caps)?;
    let elapsed = start.elapsed();
    let cane = produced(&d, "sugarcane");
    let straw = produced(&d, "straw");
    let bagasse = produced(&d, "bagasse");
    let cake = produced(&d, "filter_cake");
    let power = produced(&d, "electricity");
    let straw_burnt = d.levels["electricity_from_residues"] * 70.0;
    let bagasse_left = bagasse - consumed(&d, "bagasse");
    // Quoted figures (base units) and the values that follow from the data.
    let rows = [
        ("sugarcane t", cane, 3.86e6, 46_000.0 * 84.0),
        ("straw t", straw, 541e3, 46_000.0 * 11.76),
        ("bagasse t", bagasse, 966e3, 46_000.0 * 84.0 * 0.25),
        ("filter cake t", cake, 115.92e3, 46_000.0 * 84.0 * 0.03),
        ("electricity MWh", power, 439e3, 966_000.0 / 297.0 * 135.0),
        ("straw burnt t", straw_burnt, 228e3, 966_000.0 / 297.0 * 70.0),
    ];
    let mut ok = elapsed < Duration::from_secs(5) && bagasse_left.abs() < 1e-6 * bagasse;
    let mut parts = Vec::new();
    for (label, got, quoted, derived) in rows {
        ok &= within(got, quoted, 0.005) && within(got, derived, 1e-9);
        parts.push(format!("{label} {got:.2}"));
    }
    let detail = format!("{}; {elapsed:?}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// All filter cake goes to biomethane, and with biomethane unpriced all of it
/// is reformed into hydrogen.
fn waste_chain() -> Verdict {
    let case = appendix();
    let mut f = case.facility.clone();
    f.products.iter_mut().filter(|p| p.id == "biomethane").for_each(|p| p.base_price = 0.0);
    let caps = capacities(
        &f,
        &[("electricity_from_residues", 250.0), ("biomethane_production", 120.0), ("steam_methane_reforming", 20.0)],
    );
    let d = dispatch_once(&f, &caps)?;
    let methane = produced(&d, "biomethane");
    let hydrogen = produced(&d, "hydrogen");
    let cake_left = produced(&d, "filter_cake") - consumed(&d, "filter_cake");
    let derived_methane = 16e6 * 115_920.0 / 115_800.0;
    let ok = within(methane, 16.02e6, 0.005)
        && within(methane, derived_methane, 1e-9)
        && within(hydrogen, 3.81e3, 0.005)
        && within(hydrogen, derived_methane / 4.2 * 1e-3, 1e-9)
        && cake_left.abs() < 1e-6;
    let detail = format!("biomethane {methane:.1} m3, hydrogen {hydrogen:.3} t");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sugar priced 0.1 % either side of 0.6534 times the ethanol price per kL,
/// every other product unpriced.
fn switch_threshold() -> Verdict {
    let case = appendix();
    let ethanol = 0.51;
    let threshold = 0.6534 * ethanol * 1000.0;
    let mut picks = Vec::new();
    for factor in [0.999, 1.001] {
        let mut f = case.facility.clone();
        for p in &mut f.products {
            p.base_price = match p.id.as_str() {
                "sugar" => threshold * factor,
                "ethanol_1g" => ethanol,
                _ => 0.0,
            };
        }
        let d = dispatch_once(&f, &capacities(&f, &[]))?;
        let (sugar_first, ethanol_first) = (d.levels["sugar_e1g"], d.levels["e1g_sugar"]);
        let pick = if sugar_first > ethanol_first { "sugar_e1g" } else { "e1g_sugar" };
        let other = sugar_first.min(ethanol_first);
        picks.push((factor, pick, sugar_first.max(ethanol_first), other));
    }
    let detail = picks
        .iter()
        .map(|(f, p, top, other)| format!("x{f}: {p} at level {top:.0} (other {other:.3})"))
        .collect::<Vec<_>>()
        .join("; ");
    let ok = picks[0].1 == "e1g_sugar" && picks[1].1 == "sugar_e1g" && picks.iter().all(|p| p.2 > 0.0 && p.3 < 1e-6);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn piecewise_encoding() -> Verdict {
    let case = appendix();
    let mill = case.facility.plant("sugar_mill").expect("mill plant");
    let curve = CapexCurve::for_plant(mill).map_err(|e| e.to_string())?;
    let grid = 20_001;
    let mut ok = true;
    let mut last = f64::INFINITY;
    let mut parts = Vec::new();
    for m in [1, 2, 4, 8, 16] {
        let range = max_rel_error(&build_breakpoints_range_uniform(&curve, m).map_err(|e| e.to_string())?, &curve, grid);
        let domain = max_rel_error(&build_breakpoints_domain_uniform(&curve, m).map_err(|e| e.to_string())?, &curve, grid);
        ok &= range <= last && range <= domain;
        last = range;
        parts.push(format!("M={m} {range:.3e}/{domain:.3e}"));
    }
    let fine = max_rel_error(&build_breakpoints_range_uniform(&curve, 64).map_err(|e| e.to_string())?, &curve, grid);
    ok &= fine < 1e-4;
    let detail = format!("range/domain error {}; M=64 {fine:.3e}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cvar_consistency() -> Verdict {
    let q = [10.0, 20.0, 30.0, 40.0];
    let p = [0.25; 4];
    let hand = [(0.75, 40.0), (0.5, 35.0)];
    let mut ok = true;
    for (alpha, want) in hand {
        let got = discrete_cvar(&q, &p, alpha).map_err(|e| e.to_string())?;
        ok &= (got - want).abs() < 1e-12;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shape = Shape { max_plants: 2, max_segments: 3, max_scenarios: 20 };
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut case = random_case(&mut rng, &shape);
        case.risk.lambda = rng.gen_range(0.05..=1.0);
        let (_, index, sol) = solve_extensive(&case).map_err(|e| e.to_string())?;
        let x = &sol.values;
        let d = ObjectiveDecomposition::from_values(&index, &case.scenarios.probabilities, &case.risk, x);
        let costs: Vec<f64> = index.scenarios.iter().map(|s| x[s.q.0]).collect();
        let sorted = discrete_cvar(&costs, &case.scenarios.probabilities, case.risk.alpha).map_err(|e| e.to_string())?;
        worst = worst.max(rel_diff(d.cvar, sorted));
    }
    ok &= worst <= 1e-6;
    let detail = format!("hand values exact, worst relative gap over 50 cases {worst:.2e}");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shape = Shape { max_plants: 3, max_segments: 4, max_scenarios: 10 };
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let case = random_case(&mut rng, &shape);
        let (model, index) = build_extensive_form(&case).map_err(|e| e.to_string())?;
        let sol = solve_reference_milp(&model, &index, &case.solver).map_err(|e| e.to_string())?;
        let oracle = oracle_objective(&case).ok_or_else(|| format!("instance {n}: oracle found no feasible choice"))?;
        if !sol.is_optimal() {
            return Err(format!("instance {n}: reference solver ended {}", sol.status));
        }
        worst = worst.max(rel_diff(sol.objective, oracle));
    }
    let elapsed = start.elapsed();
    let detail = format!("worst relative gap {worst:.2e} over 100 instances, {elapsed:?}");
    if worst <= 1e-6 && elapsed < Duration::from_secs(120) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn frontier() -> Verdict {
    let start = Instant::now();
    let mut case = appendix();
    case.risk.alpha = 0.9;
    let points = risk_frontier(&case, &[0.0, 0.25, 0.5, 0.75, 1.0]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let slack = |a: f64, b: f64| 1e-6 * a.abs().max(b.abs());
    let ok = points.len() == 5
        && points.windows(2).all(|w| {
            w[1].cvar <= w[0].cvar + slack(w[0].cvar, w[1].cvar)
                && w[1].expected >= w[0].expected - slack(w[0].expected, w[1].expected)
        })
        && elapsed < Duration::from_secs(300);
    let detail = format!(
        "{} ({elapsed:?})",
        points
            .iter()
            .map(|p| format!("lambda {}: E {:.3} CVaR {:.3} MM$", p.lambda, p.expected / 1e6, p.cvar / 1e6))
            .collect::<Vec<_>>()
            .join("; ")
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli(args: &[&OsString]) -> Result<(), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec![OsString::from("biocap")];
    argv.extend(args.iter().map(|a| (*a).clone()));
    let code = biocap::cli::run(argv, &mut out, &mut err);
    if code == 0 {
        Ok(())
    } else {
        Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn solve_outputs(case: &Path, workers: usize, dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let args: Vec<OsString> = vec![
        "solve".into(),
        case.into(),
        "--workers".into(),
        workers.to_string().into(),
        "--out-dir".into(),
        dir.into(),
    ];
    cli(&args.iter().collect::<Vec<_>>())?;
    ["solution.json", "report.txt", "report.json"]
        .iter()
        .map(|f| fs::read(dir.join(f)).map_err(|e| e.to_string()))
        .collect()
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let small = random_case(&mut rng, &Shape { max_plants: 3, max_segments: 4, max_scenarios: 10 });
    let small_path = tmp.path().join("small.json");
    biocap::case::save_case(&small, &small_path).map_err(|e| e.to_string())?;
    let mut checked = Vec::new();
    for (label, path) in [("small", small_path), ("appendix", appendix_path())] {
        let runs = [(1, "a"), (1, "b"), (4, "c")]
            .iter()
            .map(|(w, tag)| solve_outputs(&path, *w, &tmp.path().join(format!("{label}_{tag}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if runs[0] != runs[1] || runs[0] != runs[2] {
            return Err(format!("{label}: outputs differ between runs"));
        }
        checked.push(label);
    }
    Ok(format!("byte-identical solution.json, report.txt, report.json for {checked:?} at 1, 1 and 4 workers"))
}

#[derive(Default)]
struct MpsModel {
    rows: Vec<(String, char)>,
    coef: BTreeMap<(String, String), f64>,
    rhs: BTreeMap<String, f64>,
    columns: Vec<String>,
    integer: BTreeSet<String>,
    bounds: BTreeMap<String, (f64, f64)>,
    objective: BTreeMap<String, f64>,
}

/// Minimal MPS reader, independent of the writer: whitespace-separated
/// fields, integer markers, and the bound types the format defines.
fn read_mps(text: &str) -> Result<MpsModel, String> {
    let mut m = MpsModel::default();
    let mut section = "";
    let mut in_int = false;
    let mut objective_row = String::new();
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("bad number '{s}': {e}"));
    for line in text.lines() {
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            section = match line.split_whitespace().next().unwrap_or("") {
                "NAME" => "NAME",
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "RANGES" => "RANGES",
                "BOUNDS" => "BOUNDS",
                "ENDATA" => "ENDATA",
                other => return Err(format!("unknown section {other}")),
            };
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "ROWS" => {
                let kind = f[0].chars().next().ok_or("empty row type")?;
                if kind == 'N' {
                    objective_row = f[1].to_string();
                } else {
                    m.rows.push((f[1].to_string(), kind));
                }
            }
            "COLUMNS" => {
                if f.get(1) == Some(&"'MARKER'") {
                    in_int = f[2] == "'INTORG'";
                    continue;
                }
                let col = f[0].to_string();
                if m.columns.last() != Some(&col) {
                    if m.columns.contains(&col) {
                        return Err(format!("column {col} is not contiguous"));
                    }
                    m.columns.push(col.clone());
                    m.bounds.insert(col.clone(), (0.0, f64::INFINITY));
                    if in_int {
                        m.integer.insert(col.clone());
                    }
                }
                for pair in f[1..].chunks(2) {
                    let v = num(pair[1])?;
                    if pair[0] == objective_row {
                        m.objective.insert(col.clone(), v);
                    } else if m.coef.insert((pair[0].to_string(), col.clone()), v).is_some() {
                        return Err(format!("duplicate entry {} {col}", pair[0]));
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    m.rhs.insert(pair[0].to_string(), num(pair[1])?);
                }
            }
            "RANGES" => return Err("ranges are not expected".into()),
            "BOUNDS" => {
                let b = m.bounds.get_mut(f[2]).ok_or_else(|| format!("bound on unknown column {}", f[2]))?;
                match f[0] {
                    "UP" => b.1 = num(f[3])?,
                    "LO" => b.0 = num(f[3])?,
                    "FX" => *b = (num(f[3])?, num(f[3])?),
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    "BV" => *b = (0.0, 1.0),
                    other => return Err(format!("unknown bound type {other}")),
                }
            }
            _ => return Err(format!("data line outside a section: {line}")),
        }
    }
    if section != "ENDATA" {
        return Err("missing ENDATA".into());
    }
    Ok(m)
}

/// Every row, coefficient, right-hand side, bound, objective entry and
/// integrality flag of `model` must come back bit for bit.
fn compare_mps(model: &MilpModel, m: &MpsModel) -> Result<usize, String> {
    let vars = model.variables();
    let names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    if m.columns.iter().map(String::as_str).collect::<Vec<_>>() != names {
        return Err("column list differs".into());
    }
    if m.rows.len() != model.num_rows() {
        return Err(format!("{} rows read, {} written", m.rows.len(), model.num_rows()));
    }
    let mut checked = 0;
    let mut expected = BTreeMap::new();
    for (row, (name, kind)) in model.constraints().iter().zip(&m.rows) {
        let want = match row.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        if *name != row.name || *kind != want {
            return Err(format!("row {} read as {name} {kind}", row.name));
        }
        let rhs = m.rhs.get(name).copied().unwrap_or(0.0);
        if rhs.to_bits() != row.rhs.to_bits() && !(rhs == 0.0 && row.rhs == 0.0) {
            return Err(format!("rhs of {name}: {rhs} vs {}", row.rhs));
        }
        for &(v, a) in &row.terms {
            if expected.insert((row.name.clone(), names[v.0].to_string()), a).is_some() {
                return Err(format!("row {} lists {} twice", row.name, names[v.0]));
            }
        }
    }
    if expected.len() != m.coef.len() {
        return Err(format!("{} coefficients read, {} expected", m.coef.len(), expected.len()));
    }
    for (key, a) in &expected {
        match m.coef.get(key) {
            Some(b) if b.to_bits() == a.to_bits() => checked += 1,
            other => return Err(format!("coefficient {key:?}: {other:?} vs {a}")),
        }
    }
    for (j, v) in vars.iter().enumerate() {
        let c = model.objective()[j];
        let read = m.objective.get(&v.name).copied().unwrap_or(0.0);
        if read.to_bits() != c.to_bits() && !(read == 0.0 && c == 0.0) {
            return Err(format!("objective of {}: {read} vs {c}", v.name));
        }
        let (lo, hi) = m.bounds[&v.name];
        if lo.to_bits() != v.lower.to_bits() && !(lo == 0.0 && v.lower == 0.0)
            || hi.to_bits() != v.upper.to_bits() && !(hi == 0.0 && v.upper == 0.0)
        {
            return Err(format!("bounds of {}: [{lo}, {hi}] vs [{}, {}]", v.name, v.lower, v.upper));
        }
        if m.integer.contains(&v.name) != (v.kind == VarKind::Binary) {
            return Err(format!("integrality of {}", v.name));
        }
        checked += 3;
    }
    Ok(checked)
}

/// Objective of an MPS file solved by HiGHS through its C interface.
fn highs_objective_from_file(path: &Path) -> Result<f64, String> {
    let file = CString::new(path.to_str().ok_or("non-utf8 path")?).map_err(|e| e.to_string())?;
    let opt = |s: &str| CString::new(s).expect("option name");
    unsafe {
        let h = highs_sys::Highs_create();
        highs_sys::Highs_setBoolOptionValue(h, opt("output_flag").as_ptr(), 0);
        highs_sys::Highs_setDoubleOptionValue(h, opt("mip_rel_gap").as_ptr(), 1e-9);
        highs_sys::Highs_setIntOptionValue(h, opt("threads").as_ptr(), 1);
        let read = highs_sys::Highs_readModel(h, file.as_ptr());
        let result = if read == highs_sys::STATUS_ERROR {
            Err("HiGHS could not read the file".to_string())
        } else {
            highs_sys::Highs_run(h);
            match highs_sys::Highs_getModelStatus(h) {
                highs_sys::MODEL_STATUS_OPTIMAL => Ok(highs_sys::Highs_getObjectiveValue(h)),
                s => Err(format!("HiGHS model status {s}")),
            }
        };
        highs_sys::Highs_destroy(h);
        result
    }
}

/// Plants left free in the reduction that the enumerating solver can handle.
const FREE_PLANTS: [&str; 6] =
    ["harvesting", "sugar_mill", "pyrolysis", "alcohol_to_jet", "electricity_from_residues", "beccs"];

fn mps_round_trip() -> Verdict {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first5: Vec<usize> = (0..5).collect();

    // Full eight-segment model, exported through the command line.
    let full_path = tmp.path().join("appendix5.mps");
    let args: Vec<OsString> = vec![
        "export".into(),
        appendix_path().into(),
        "--scenarios".into(),
        "5".into(),
        "--mps".into(),
        full_path.clone().into(),
    ];
    cli(&args.iter().collect::<Vec<_>>())?;
    let mut case = appendix();
    case.scenarios = case.scenarios.subset(&first5);
    let (model, _) = build_extensive_form(&case).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(&full_path).map_err(|e| e.to_string())?;
    let full_checked = compare_mps(&model, &read_mps(&text)?)?;

    // Reduction with the remaining plants pinned at zero, two segments each.
    let pinned: BTreeMap<String, f64> = case
        .facility
        .plants
        .iter()
        .filter(|p| !FREE_PLANTS.contains(&p.id.as_str()))
        .map(|p| (p.id.clone(), p.initial_capacity))
        .collect();
    let overrides = Overrides { fixed_capacities: pinned, ..Overrides::default() };
    let overrides_path = tmp.path().join("pin.json");
    fs::write(&overrides_path, serde_json::to_string(&overrides).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let small_path = tmp.path().join("pinned5.mps");
    let args: Vec<OsString> = vec![
        "export".into(),
        appendix_path().into(),
        "--overrides".into(),
        overrides_path.into(),
        "--segments".into(),
        "2".into(),
        "--scenarios".into(),
        "5".into(),
        "--mps".into(),
        small_path.clone().into(),
    ];
    cli(&args.iter().collect::<Vec<_>>())?;
    let mut small = apply_overrides(&appendix(), &overrides).map_err(|e| e.to_string())?;
    small.scenarios = small.scenarios.subset(&first5);
    small.segments = 2;
    let (small_model, small_index) = build_extensive_form(&small).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(&small_path).map_err(|e| e.to_string())?;
    let small_checked = compare_mps(&small_model, &read_mps(&text)?)?;

    let options = SolverOptions { backend: Backend::Reference, ..small.solver };
    let reference = solve_reference_milp(&small_model, &small_index, &options).map_err(|e| e.to_string())?;
    if !reference.is_optimal() {
        return Err(format!("reference solver ended {}", reference.status));
    }
    let external = highs_objective_from_file(&small_path)?;
    let gap = rel_diff(reference.objective, external);
    let detail = format!(
        "{full_checked} entries exact (8 segments), {small_checked} entries exact (pinned reduction); \
         HiGHS on the re-read file {external:.6} vs reference {:.6}, gap {gap:.2e}",
        reference.objective
    );
    if gap <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("1 scale law", scale_law),
        ("2 mass balance", mass_balance),
        ("3 waste-chain yields", waste_chain),
        ("4 mill switch threshold", switch_threshold),
        ("5 piecewise encoding", piecewise_encoding),
        ("6 CVaR consistency", cvar_consistency),
        ("7 solver oracle equivalence", oracle_equivalence),
        ("8 risk frontier", frontier),
        ("9 determinism", determinism),
        ("10 MPS round trip", mps_round_trip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
