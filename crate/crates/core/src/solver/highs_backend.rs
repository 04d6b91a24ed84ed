//! HiGHS branch-and-cut for models with too many segment combinations to
//! enumerate. The binaries it returns are rounded, fixed, and the remaining
//! LP is re-solved so the reported point is exactly integral.

use std::num::NonZeroU32;

use highs::{ColProblem, HighsModelStatus, Sense as HighsSense};

use super::{feasibility_audit, MilpSolution, SolverOptions, Status};
use crate::error::SolverError;
use crate::milp::{MilpModel, Sense, VarKind};
use crate::program::ModelIndex;

const BACKEND: &str = "highs";

enum Outcome {
    Solved(Vec<f64>),
    Stopped(Status),
}

fn run(model: &MilpModel, bounds: &[(f64, f64)], integral: bool, options: &SolverOptions) -> Result<Outcome, SolverError> {
    let mut pb = ColProblem::default();
    let rows: Vec<_> = model
        .constraints()
        .iter()
        .map(|c| match c.sense {
            Sense::Le => pb.add_row(f64::NEG_INFINITY..=c.rhs),
            Sense::Ge => pb.add_row(c.rhs..=f64::INFINITY),
            Sense::Eq => pb.add_row(c.rhs..=c.rhs),
        })
        .collect();
    let mut columns: Vec<Vec<(highs::Row, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(v, a) in &c.terms {
            columns[v.0].push((rows[i], a));
        }
    }
    for (j, var) in model.variables().iter().enumerate() {
        let (lo, hi) = bounds[j];
        let cost = model.objective()[j];
        if integral && var.kind == VarKind::Binary {
            pb.add_integer_column(cost, lo..=hi, &columns[j]);
        } else {
            pb.add_column(cost, lo..=hi, &columns[j]);
        }
    }
    let mut m = pb
        .try_optimise(HighsSense::Minimise)
        .map_err(|e| SolverError::Backend(format!("HiGHS rejected the model: {e:?}")))?;
    m.make_quiet();
    m.set_threads(NonZeroU32::new(1).expect("nonzero"));
    let settings: [(&str, f64); 4] = [
        ("mip_rel_gap", 1e-9),
        ("mip_abs_gap", 1e-6),
        ("primal_feasibility_tolerance", options.feasibility_tolerance.min(1e-7)),
        ("dual_feasibility_tolerance", options.optimality_tolerance.min(1e-7)),
    ];
    for (name, value) in settings {
        m.try_set_option(name, value)
            .map_err(|e| SolverError::Backend(format!("option {name}: {e:?}")))?;
    }
    m.try_set_option("random_seed", 0)
        .map_err(|e| SolverError::Backend(format!("option random_seed: {e:?}")))?;
    let solved = m.try_solve().map_err(|e| SolverError::Backend(format!("HiGHS failed: {e:?}")))?;
    Ok(match solved.status() {
        HighsModelStatus::Optimal => Outcome::Solved(solved.get_solution().columns().to_vec()),
        HighsModelStatus::Infeasible => Outcome::Stopped(Status::Infeasible),
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => Outcome::Stopped(Status::Unbounded),
        _ => Outcome::Stopped(Status::Numerical),
    })
}

pub fn solve_highs(model: &MilpModel, index: &ModelIndex, options: &SolverOptions) -> Result<MilpSolution, SolverError> {
    options.check().map_err(SolverError::Options)?;
    let mut bounds: Vec<(f64, f64)> = model.variables().iter().map(|v| (v.lower, v.upper)).collect();
    let has_binaries = model.num_binaries() > 0;
    let mut x = match run(model, &bounds, true, options)? {
        Outcome::Solved(x) => x,
        Outcome::Stopped(status) => return Ok(MilpSolution::without_values(status, BACKEND)),
    };
    if has_binaries {
        for (j, var) in model.variables().iter().enumerate() {
            if var.kind == VarKind::Binary {
                let v = x[j].round().clamp(var.lower, var.upper);
                bounds[j] = (v, v);
            }
        }
        x = match run(model, &bounds, false, options)? {
            Outcome::Solved(x) => x,
            Outcome::Stopped(_) => {
                return Err(SolverError::Backend("LP with the incumbent's binaries fixed did not solve".into()))
            }
        };
        for (j, var) in model.variables().iter().enumerate() {
            if var.kind == VarKind::Binary {
                x[j] = bounds[j].0;
            }
        }
    }
    for (v, &(lo, hi)) in x.iter_mut().zip(&bounds) {
        *v = v.clamp(lo, hi);
    }
    if let Err(v) = feasibility_audit(model, &x, options.feasibility_tolerance) {
        return Err(SolverError::Backend(format!("HiGHS solution fails the residual audit: {v}")));
    }
    Ok(MilpSolution {
        status: Status::Optimal,
        objective: model.evaluate(&x),
        active_segments: index.active_segments(&x),
        values: x,
        row_duals: None,
        backend: BACKEND.to_string(),
    })
}
