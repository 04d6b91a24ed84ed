//! Solver-agnostic mixed-integer linear program: bounded variables, sparse
//! rows, and a minimization objective.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::BuildError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

impl Variable {
    pub fn is_free(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    #[serde(skip)]
    names: HashMap<String, usize>,
    #[serde(skip)]
    row_names: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel { name: name.into(), ..Default::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind) -> Result<VarId, BuildError> {
        let name = name.into();
        if self.names.contains_key(&name) {
            return Err(BuildError::DuplicateName(name));
        }
        self.names.insert(name.clone(), self.variables.len());
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        self.variables.push(Variable { name, lower, upper, kind });
        self.objective.push(0.0);
        Ok(VarId(self.variables.len() - 1))
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, BuildError> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(BuildError::DuplicateName(name));
        }
        self.row_names.insert(name.clone(), self.constraints.len());
        debug_assert!(terms.iter().all(|(v, _)| v.0 < self.variables.len()));
        self.constraints.push(Constraint { name, terms, sense, rhs });
        Ok(RowId(self.constraints.len() - 1))
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] = coef;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn set_bounds(&mut self, id: VarId, lower: f64, upper: f64) {
        self.variables[id.0].lower = lower;
        self.variables[id.0].upper = upper;
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        if self.names.len() == self.variables.len() {
            return self.names.get(name).map(|&i| VarId(i));
        }
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.constraints.iter().map(|c| c.terms.len()).sum()
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Structural invariants: known variable ids, binaries in [0, 1], only
    /// finite bounds apart from fully free variables.
    pub fn check(&self) -> Result<(), String> {
        for v in &self.variables {
            if v.kind == VarKind::Binary && !(v.lower >= 0.0 && v.upper <= 1.0) {
                return Err(format!("binary '{}' has bounds [{}, {}]", v.name, v.lower, v.upper));
            }
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                return Err(format!("variable '{}' has empty bounds", v.name));
            }
            let half_open = v.lower.is_finite() != v.upper.is_finite();
            if half_open || (!v.lower.is_finite() && !v.is_free()) {
                return Err(format!("variable '{}' has a one-sided infinite bound", v.name));
            }
        }
        for c in &self.constraints {
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.variables.len()) {
                return Err(format!("row '{}' references undeclared variable {}", c.name, v.0));
            }
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(format!("row '{}' has non-finite data", c.name));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err("objective has non-finite coefficients".into());
        }
        Ok(())
    }

    /// Rebuilds name lookups after deserialization.
    pub fn reindex(&mut self) {
        self.names = self.variables.iter().enumerate().map(|(i, v)| (v.name.clone(), i)).collect();
        self.row_names = self.constraints.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let mut m = MilpModel::new("t");
        m.add_var("x", 0.0, 1.0, VarKind::Continuous).unwrap();
        assert!(m.add_var("x", 0.0, 1.0, VarKind::Continuous).is_err());
        let x = m.var_by_name("x").unwrap();
        m.add_constraint("r", vec![(x, 1.0)], Sense::Le, 1.0).unwrap();
        assert!(m.add_constraint("r", vec![(x, 1.0)], Sense::Le, 1.0).is_err());
    }

    #[test]
    fn check_flags_half_open_bounds() {
        let mut m = MilpModel::new("t");
        m.add_var("z", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous).unwrap();
        assert!(m.check().is_ok());
        m.add_var("x", 0.0, f64::INFINITY, VarKind::Continuous).unwrap();
        assert!(m.check().is_err());
    }

    #[test]
    fn evaluate_objective() {
        let mut m = MilpModel::new("t");
        let x = m.add_var("x", 0.0, 4.0, VarKind::Continuous).unwrap();
        let b = m.add_var("b", 0.0, 1.0, VarKind::Binary).unwrap();
        m.set_objective(x, 2.0);
        m.set_objective(b, -1.0);
        assert_eq!(m.evaluate(&[3.0, 1.0]), 5.0);
        assert_eq!(m.num_binaries(), 1);
    }
}
