//! Solving the MILP representation: a bundled enumerative reference solver
//! on top of a dense simplex, a HiGHS backend for instances too large to
//! enumerate, MPS export, and a bridge for external solution files.

pub mod audit;
pub mod bridge;
pub mod highs_backend;
pub mod mps;
pub mod reference;
pub mod simplex;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::milp::{MilpModel, VarKind};
use crate::program::ModelIndex;

pub use audit::{feasibility_audit, lagrangian_bound, AuditViolation};
pub use bridge::{import_solution, parse_solution, solution_from_pairs};
pub use highs_backend::solve_highs;
pub use mps::{export_mps, write_mps};
pub use reference::{combination_count, solve_reference_milp};

/// Objectives within this relative distance of the best are ties; the
/// lexicographically smallest segment choice among them wins.
pub const TIE_BREAK_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Enumerate when the segment combinations fit under the cap, else HiGHS.
    #[default]
    Auto,
    Reference,
    Highs,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Backend::Auto),
            "reference" => Ok(Backend::Reference),
            "highs" => Ok(Backend::Highs),
            other => Err(format!("unknown backend '{other}' (expected auto, reference or highs)")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Auto => "auto",
            Backend::Reference => "reference",
            Backend::Highs => "highs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub feasibility_tolerance: f64,
    pub optimality_tolerance: f64,
    pub max_enumeration: u64,
    pub workers: usize,
    pub backend: Backend,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tolerance: 1e-7,
            optimality_tolerance: 1e-7,
            max_enumeration: 1_000_000,
            workers: 1,
            backend: Backend::Auto,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<(), String> {
        if !(self.feasibility_tolerance > 0.0 && self.optimality_tolerance > 0.0) {
            return Err("tolerances must be > 0".into());
        }
        if self.max_enumeration < 1 {
            return Err("enumeration cap must be at least 1".into());
        }
        if self.workers < 1 {
            return Err("at least one worker is required".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    CapExceeded,
    /// Iteration limit or numerical breakdown.
    Numerical,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::CapExceeded => "cap_exceeded",
            Status::Numerical => "numerical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: Status,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Segment index (0-based) with its binary set, per plant.
    pub active_segments: Vec<Option<usize>>,
    /// Row multipliers; present for pure LP solves by the simplex.
    pub row_duals: Option<Vec<f64>>,
    /// Which backend produced the solution.
    pub backend: String,
}

impl MilpSolution {
    pub fn without_values(status: Status, backend: &str) -> Self {
        MilpSolution {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            active_segments: Vec::new(),
            row_duals: None,
            backend: backend.to_string(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

pub(crate) fn model_bounds(model: &MilpModel) -> Vec<(f64, f64)> {
    model.variables().iter().map(|v| (v.lower, v.upper)).collect()
}

/// Solves a model without free binaries (fixed ones are accepted). The
/// returned solution carries row duals and has passed the residual audit.
pub fn solve_lp(model: &MilpModel, options: &SolverOptions) -> Result<MilpSolution, SolverError> {
    options.check().map_err(SolverError::Options)?;
    if let Some(v) = model.variables().iter().find(|v| v.kind == VarKind::Binary && v.lower != v.upper) {
        return Err(SolverError::UnexpectedBinary(v.name.clone()));
    }
    let r = simplex::solve_bounded(model, &model_bounds(model), options.feasibility_tolerance, None);
    Ok(lp_result_to_solution(model, r, options, "simplex"))
}

pub(crate) fn lp_result_to_solution(
    model: &MilpModel,
    r: simplex::LpResult,
    options: &SolverOptions,
    backend: &str,
) -> MilpSolution {
    let status = match r.status {
        simplex::LpStatus::Optimal => Status::Optimal,
        simplex::LpStatus::Infeasible => Status::Infeasible,
        simplex::LpStatus::Unbounded => Status::Unbounded,
        simplex::LpStatus::IterationLimit | simplex::LpStatus::Numerical => Status::Numerical,
    };
    if status != Status::Optimal {
        return MilpSolution::without_values(status, backend);
    }
    if feasibility_audit(model, &r.x, options.feasibility_tolerance).is_err() {
        return MilpSolution::without_values(Status::Numerical, backend);
    }
    MilpSolution {
        status,
        objective: r.objective,
        values: r.x,
        active_segments: Vec::new(),
        row_duals: Some(r.duals),
        backend: backend.to_string(),
    }
}

/// Solves the extensive form with the backend named in `options`.
pub fn solve(model: &MilpModel, index: &ModelIndex, options: &SolverOptions) -> Result<MilpSolution, SolverError> {
    options.check().map_err(SolverError::Options)?;
    match options.backend {
        Backend::Reference => solve_reference_milp(model, index, options),
        Backend::Highs => solve_highs(model, index, options),
        Backend::Auto => {
            if combination_count(index) <= options.max_enumeration as f64 {
                solve_reference_milp(model, index, options)
            } else {
                solve_highs(model, index, options)
            }
        }
    }
}
