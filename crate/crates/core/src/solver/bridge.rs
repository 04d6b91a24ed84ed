//! Reads solutions produced by external MILP solvers. The format is one
//! `name value` pair per line; `#` starts a comment. Variables that the file
//! leaves out are taken as zero, which is how most solvers abbreviate their
//! output. Every imported point is re-audited against the model rows.

use std::fs;
use std::path::Path;

use super::{feasibility_audit, MilpSolution, SolverOptions, Status};
use crate::error::SolverError;
use crate::milp::MilpModel;
use crate::program::ModelIndex;

const BACKEND: &str = "external";

/// Parses the bridge format into `(name, value)` pairs in file order.
pub fn parse_solution(text: &str) -> Result<Vec<(String, f64)>, SolverError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let (Some(name), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(SolverError::SolutionFormat { line: n + 1, message: "expected 'name value'".into() });
        };
        let value: f64 = value
            .parse()
            .map_err(|_| SolverError::SolutionFormat { line: n + 1, message: format!("'{value}' is not a number") })?;
        if !value.is_finite() {
            return Err(SolverError::SolutionFormat { line: n + 1, message: "value is not finite".into() });
        }
        out.push((name.to_string(), value));
    }
    if out.is_empty() {
        return Err(SolverError::EmptySolution);
    }
    Ok(out)
}

/// Maps parsed values onto the model, rejects the point if any row or bound
/// is violated beyond the feasibility tolerance, and recomputes the objective.
pub fn solution_from_pairs(
    pairs: &[(String, f64)],
    model: &MilpModel,
    index: &ModelIndex,
    options: &SolverOptions,
) -> Result<MilpSolution, SolverError> {
    let mut values = vec![0.0; model.num_vars()];
    let mut seen = vec![false; model.num_vars()];
    for (name, value) in pairs {
        let id = model.var_by_name(name).ok_or_else(|| SolverError::UnknownVariable(name.clone()))?;
        if seen[id.0] {
            return Err(SolverError::Rejected(format!("variable '{name}' is listed twice")));
        }
        seen[id.0] = true;
        values[id.0] = *value;
    }
    feasibility_audit(model, &values, options.feasibility_tolerance).map_err(|v| SolverError::Rejected(v.to_string()))?;
    Ok(MilpSolution {
        status: Status::Optimal,
        objective: model.evaluate(&values),
        active_segments: index.active_segments(&values),
        values,
        row_duals: None,
        backend: BACKEND.to_string(),
    })
}

pub fn import_solution(
    path: impl AsRef<Path>,
    model: &MilpModel,
    index: &ModelIndex,
    options: &SolverOptions,
) -> Result<MilpSolution, SolverError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SolverError::Io { path: path.to_path_buf(), source })?;
    solution_from_pairs(&parse_solution(&text)?, model, index, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let pairs = parse_solution("# header\n\nx 1.5  # trailing\n y\t-2e3\n").unwrap();
        assert_eq!(pairs, vec![("x".to_string(), 1.5), ("y".to_string(), -2000.0)]);
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_solution(""), Err(SolverError::EmptySolution)));
        assert!(matches!(parse_solution("# nothing\n"), Err(SolverError::EmptySolution)));
        assert!(matches!(parse_solution("x\n"), Err(SolverError::SolutionFormat { line: 1, .. })));
        assert!(matches!(parse_solution("x 1\ny one\n"), Err(SolverError::SolutionFormat { line: 2, .. })));
        assert!(matches!(parse_solution("x 1 2\n"), Err(SolverError::SolutionFormat { .. })));
    }
}
