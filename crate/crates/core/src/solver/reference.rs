//! Exact MILP solving by enumerating one segment choice per plant.
//!
//! At most one segment binary per plant can be set, so fixing every plant's
//! choice (a segment, or none) leaves an LP. The best LP over all
//! combinations is the MILP optimum.

use rayon::prelude::*;

use super::simplex::{solve_bounded, LpStatus};
use super::{feasibility_audit, model_bounds, MilpSolution, SolverOptions, Status, TIE_BREAK_REL};
use crate::error::SolverError;
use crate::milp::{MilpModel, VarKind};
use crate::program::ModelIndex;

const BACKEND: &str = "reference";

/// Number of segment combinations, as a float so it cannot overflow.
pub fn combination_count(index: &ModelIndex) -> f64 {
    index.plants.iter().map(|p| (p.segments.len() + 1) as f64).product()
}

/// Choice per plant for combination `id`: 0 means no segment, `p` means
/// segment `p - 1`. Plant 0 is the most significant digit, so increasing ids
/// visit choice vectors in lexicographic order.
pub fn decode_combination(index: &ModelIndex, mut id: u64) -> Vec<usize> {
    let mut out = vec![0; index.plants.len()];
    for (k, p) in index.plants.iter().enumerate().rev() {
        let radix = p.segments.len() as u64 + 1;
        out[k] = (id % radix) as usize;
        id /= radix;
    }
    out
}

fn fixed_bounds(base: &[(f64, f64)], index: &ModelIndex, choice: &[usize]) -> Vec<(f64, f64)> {
    let mut b = base.to_vec();
    for (plant, &pick) in index.plants.iter().zip(choice) {
        for (p, seg) in plant.segments.iter().enumerate() {
            if pick == p + 1 {
                b[seg.eta.0] = (1.0, 1.0);
            } else {
                b[seg.eta.0] = (0.0, 0.0);
                b[seg.w.0] = (0.0, 0.0);
            }
        }
    }
    b
}

#[derive(Clone, Copy)]
enum Outcome {
    Value(f64),
    Infeasible,
    Unbounded,
    Failed,
}

pub fn solve_reference_milp(model: &MilpModel, index: &ModelIndex, options: &SolverOptions) -> Result<MilpSolution, SolverError> {
    options.check().map_err(SolverError::Options)?;
    let etas: Vec<usize> = index.plants.iter().flat_map(|p| p.segments.iter().map(|s| s.eta.0)).collect();
    let binaries: Vec<usize> = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let mut sorted = etas.clone();
    sorted.sort_unstable();
    if sorted != binaries {
        return Err(SolverError::UnsupportedStructure);
    }

    let combos = combination_count(index);
    if combos > options.max_enumeration as f64 {
        return Ok(MilpSolution::without_values(Status::CapExceeded, BACKEND));
    }
    let combos = combos as u64;
    let base = model_bounds(model);
    let tol = options.feasibility_tolerance;
    let evaluate = |id: u64| {
        let choice = decode_combination(index, id);
        let r = solve_bounded(model, &fixed_bounds(&base, index, &choice), tol, None);
        match r.status {
            LpStatus::Optimal => Outcome::Value(r.objective),
            LpStatus::Infeasible => Outcome::Infeasible,
            LpStatus::Unbounded => Outcome::Unbounded,
            _ => Outcome::Failed,
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| SolverError::Options(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| (0..combos).into_par_iter().map(evaluate).collect());

    if let Some(id) = outcomes.iter().position(|o| matches!(o, Outcome::Failed)) {
        return Err(SolverError::Backend(format!(
            "LP for segment choice {:?} broke down numerically",
            decode_combination(index, id as u64)
        )));
    }
    if outcomes.iter().any(|o| matches!(o, Outcome::Unbounded)) {
        return Ok(MilpSolution::without_values(Status::Unbounded, BACKEND));
    }
    let best = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Value(v) => Some(*v),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Ok(MilpSolution::without_values(Status::Infeasible, BACKEND));
    }
    // Second pass: the first combination (lexicographic order) within the tie band.
    let threshold = best + TIE_BREAK_REL * best.abs().max(1.0);
    let winner = outcomes
        .iter()
        .position(|o| matches!(o, Outcome::Value(v) if *v <= threshold))
        .expect("best value is attained") as u64;

    let choice = decode_combination(index, winner);
    let r = solve_bounded(model, &fixed_bounds(&base, index, &choice), tol, None);
    if r.status != LpStatus::Optimal {
        return Err(SolverError::Backend("re-solve of the winning combination failed".into()));
    }
    if let Err(v) = feasibility_audit(model, &r.x, tol) {
        return Err(SolverError::Backend(format!("winning solution fails the residual audit: {v}")));
    }
    Ok(MilpSolution {
        status: Status::Optimal,
        objective: r.objective,
        active_segments: choice.iter().map(|&c| c.checked_sub(1)).collect(),
        values: r.x,
        row_duals: None,
        backend: BACKEND.to_string(),
    })
}
