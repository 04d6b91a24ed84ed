//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid case or overrides, 2 solver failure,
//! 64 usage or parse error, 74 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{frontier_csv, min_viable_price, risk_frontier, solve_case, ObjectiveDecomposition, PlanSolution};
use crate::case::{apply_overrides, load_case, load_overrides, CaseFile};
use crate::error::{AnalysisError, BuildError, CaseError, SolverError};
use crate::program::build_extensive_form;
use crate::report::{fmt6, render_report, write_report};
use crate::solver::{export_mps, Backend};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "biocap", version, about = "Risk-adjusted capacity expansion planning for biomass facilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CaseArgs {
    /// Case file (JSON).
    case: PathBuf,
    /// Overrides file (JSON) applied after loading.
    #[arg(long)]
    overrides: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    /// Risk weight, overrides the case file.
    #[arg(long)]
    lambda: Option<f64>,
    /// CVaR level, overrides the case file.
    #[arg(long)]
    alpha: Option<f64>,
    /// Piecewise segments per plant, overrides the case file.
    #[arg(long)]
    segments: Option<usize>,
    /// Worker threads for segment enumeration.
    #[arg(long)]
    workers: Option<usize>,
    /// auto, reference or highs.
    #[arg(long)]
    backend: Option<Backend>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a case file and print the findings.
    Validate {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Solve a case and write solution.json, report.txt and report.json.
    Solve {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Re-render the report of a stored solution.json.
    Report {
        solution: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Minimum price at which a product becomes worth producing.
    Sensitivity {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long)]
        product: String,
        #[arg(long)]
        plant: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Also write sensitivity.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sweep the risk weight and write frontier.csv.
    Frontier {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the extensive form as an MPS file.
    Export {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long)]
        mps: PathBuf,
        /// Keep only the first N scenarios (weights renormalized).
        #[arg(long)]
        scenarios: Option<usize>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn case_code(e: &CaseError) -> i32 {
    match e {
        CaseError::Io { .. } => EXIT_IO,
        CaseError::Parse(_) | CaseError::Csv(_) => EXIT_USAGE,
        CaseError::Validation(_) | CaseError::Override(_) => EXIT_INVALID,
    }
}

fn solver_code(e: &SolverError) -> i32 {
    match e {
        SolverError::Io { .. } => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

impl From<CaseError> for Failure {
    fn from(e: CaseError) -> Self {
        Failure::new(case_code(&e), e.to_string())
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::new(solver_code(&e), e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = match &e {
            AnalysisError::Case(c) => case_code(c),
            AnalysisError::Solver(s) => solver_code(s),
            AnalysisError::Build(_) | AnalysisError::Unknown { .. } => EXIT_INVALID,
            AnalysisError::BracketInvalid(_) | AnalysisError::LambdaOutOfRange(_) => EXIT_USAGE,
            AnalysisError::AlphaOne | AnalysisError::LengthMismatch { .. } => EXIT_INVALID,
            AnalysisError::NotOptimal(_) | AnalysisError::NonMonotone(_) | AnalysisError::FrontierNotMonotone(_) => {
                EXIT_SOLVER
            }
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display()))
}

fn prepare(case: &CaseArgs, study: Option<&StudyArgs>) -> Result<CaseFile, Failure> {
    let mut c = load_case(&case.case)?;
    if let Some(path) = &case.overrides {
        c = apply_overrides(&c, &load_overrides(path)?)?;
    }
    if let Some(s) = study {
        if let Some(l) = s.lambda {
            c.risk.lambda = l;
        }
        if let Some(a) = s.alpha {
            c.risk.alpha = a;
        }
        if let Some(m) = s.segments {
            c.segments = m;
        }
        if let Some(w) = s.workers {
            c.solver.workers = w;
        }
        if let Some(b) = s.backend {
            c.solver.backend = b;
        }
    }
    let report = c.validate();
    if !report.is_ok() {
        return Err(CaseError::Validation(report).into());
    }
    Ok(c)
}

fn print_decomposition(out: &mut dyn Write, d: &ObjectiveDecomposition) {
    let mm = |v: f64| fmt6(v / 1e6);
    let _ = writeln!(
        out,
        "objective (MM$/yr) = capex annuity {} + lambda*CVaR {} + (1-lambda)*E[Q] {} = {}",
        mm(d.capex_annuity),
        mm(d.weighted_cvar),
        mm(d.weighted_expected),
        mm(d.total)
    );
}

fn print_plan(out: &mut dyn Write, plan: &PlanSolution) {
    let _ = writeln!(out, "status {} via {}", plan.status, plan.backend);
    print_decomposition(out, &plan.decomposition);
    for p in plan.plants.iter().filter(|p| p.expansion > 0.0) {
        let _ = writeln!(out, "  expand {} by {} {} to {}", p.plant_id, fmt6(p.expansion), p.capacity_unit, fmt6(p.capacity));
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { case } => {
            let mut c = match load_case(&case.case) {
                Ok(c) => c,
                Err(CaseError::Validation(report)) => {
                    let _ = writeln!(out, "{report}");
                    return Ok(EXIT_INVALID);
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(path) = &case.overrides {
                c = apply_overrides(&c, &load_overrides(path)?)?;
            }
            let report = c.validate();
            let _ = writeln!(
                out,
                "{} products, {} processes, {} plants, {} scenarios",
                c.facility.products.len(),
                c.facility.processes.len(),
                c.facility.plants.len(),
                c.scenarios.len()
            );
            let _ = writeln!(out, "{report}");
            Ok(if report.is_ok() { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Solve { case, study, out_dir } => {
            let c = prepare(&case, Some(&study))?;
            let plan = solve_case(&c)?;
            ensure_dir(&out_dir)?;
            let mut json = serde_json::to_string_pretty(&plan).expect("plan serializes");
            json.push('\n');
            write_file(&out_dir.join("solution.json"), &json)?;
            write_report(&plan, &out_dir)?;
            print_plan(out, &plan);
            let _ = writeln!(out, "wrote solution.json, report.txt and report.json to {}", out_dir.display());
            Ok(EXIT_OK)
        }
        Command::Report { solution, out_dir } => {
            let text = fs::read_to_string(&solution).map_err(|e| CaseError::io(&solution, e))?;
            let plan: PlanSolution =
                serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", solution.display())))?;
            ensure_dir(&out_dir)?;
            write_report(&plan, &out_dir)?;
            print_plan(out, &plan);
            let _ = out.write_all(render_report(&plan).text.as_bytes());
            Ok(EXIT_OK)
        }
        Command::Sensitivity { case, study, product, plant, lo, hi, tol, out_dir } => {
            let c = prepare(&case, Some(&study))?;
            let r = min_viable_price(&c, &product, &plant, (lo, hi), tol)?;
            for step in &r.trace {
                let _ = writeln!(
                    out,
                    "price {:>16}  viable {:<5}  expansion {:>14}  mean sales {:>18}",
                    fmt6(step.price),
                    step.viable,
                    fmt6(step.expansion),
                    fmt6(step.mean_sales)
                );
            }
            if let Some(at) = r.trace.iter().find(|s| s.price == r.price) {
                print_decomposition(out, &at.decomposition);
            }
            let _ = writeln!(
                out,
                "minimum viable price of {product} for {plant}: {} (bracket {} .. {})",
                fmt6(r.price),
                fmt6(r.bracket.0),
                fmt6(r.bracket.1)
            );
            if let Some(dir) = out_dir {
                ensure_dir(&dir)?;
                let mut json = serde_json::to_string_pretty(&r).expect("result serializes");
                json.push('\n');
                write_file(&dir.join("sensitivity.json"), &json)?;
            }
            Ok(EXIT_OK)
        }
        Command::Frontier { case, study, lambdas, out_dir } => {
            let c = prepare(&case, Some(&study))?;
            let points = risk_frontier(&c, &lambdas)?;
            for p in &points {
                let _ = writeln!(
                    out,
                    "lambda {}: expected {} MM$/yr, CVaR {} MM$/yr, loss probability {}",
                    fmt6(p.lambda),
                    fmt6(p.expected / 1e6),
                    fmt6(p.cvar / 1e6),
                    fmt6(p.loss_probability)
                );
                print_decomposition(out, &p.decomposition);
            }
            ensure_dir(&out_dir)?;
            write_file(&out_dir.join("frontier.csv"), &frontier_csv(&points))?;
            let _ = writeln!(out, "wrote frontier.csv to {}", out_dir.display());
            Ok(EXIT_OK)
        }
        Command::Export { case, study, mps, scenarios } => {
            let mut c = prepare(&case, Some(&study))?;
            if let Some(n) = scenarios {
                if n == 0 || n > c.scenarios.len() {
                    return Err(Failure::new(EXIT_USAGE, format!("--scenarios must be in 1..={}", c.scenarios.len())));
                }
                c.scenarios = c.scenarios.subset(&(0..n).collect::<Vec<_>>());
            }
            let (model, _) = build_extensive_form(&c)?;
            export_mps(&model, &mps)?;
            let _ = writeln!(
                out,
                "objective = sum phi*b + {}*CVaR_{} + {}*E[Q]; {} variables ({} binary), {} rows, {} nonzeros",
                fmt6(c.risk.lambda),
                fmt6(c.risk.alpha),
                fmt6(1.0 - c.risk.lambda),
                model.num_vars(),
                model.num_binaries(),
                model.num_rows(),
                model.num_nonzeros()
            );
            let _ = writeln!(out, "wrote {}", mps.display());
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
