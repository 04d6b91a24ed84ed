//! MPS writer. Fields sit at the fixed-format columns whenever names fit in
//! eight characters and are otherwise separated by two spaces, which free-MPS
//! readers accept. Numbers use the shortest text that parses back to the same
//! `f64`, so a reader recovers every coefficient bit for bit.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::SolverError;
use crate::milp::{MilpModel, Sense, VarKind};

pub const OBJECTIVE_ROW: &str = "obj";
const MAX_NAME: usize = 255;
const INT_START: &str = "    MARKER                 'MARKER'                 'INTORG'";
const INT_END: &str = "    MARKER                 'MARKER'                 'INTEND'";

/// Shortest round-trip decimal text.
pub fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 24 {
        plain
    } else {
        format!("{v:e}")
    }
}

fn sanitize(name: &str) -> String {
    let mut s: String = name.chars().map(|c| if c.is_ascii_graphic() { c } else { '_' }).collect();
    if s.is_empty() {
        s.push('_');
    }
    s.truncate(MAX_NAME);
    s
}

fn line(out: &mut String, code: &str, fields: &[&str]) {
    // Field starts in fixed MPS: 2, 5, 15, 25, 40, 50 (1-based).
    const STARTS: [usize; 5] = [4, 14, 24, 39, 49];
    let mut buf = format!(" {code:<2}");
    for (k, f) in fields.iter().enumerate() {
        let target = STARTS[k];
        if buf.len() < target {
            buf.push_str(&" ".repeat(target - buf.len()));
        } else {
            buf.push_str("  ");
        }
        buf.push_str(f);
    }
    out.push_str(buf.trim_end());
    out.push('\n');
}

/// Renders the model as MPS text.
pub fn write_mps(model: &MilpModel) -> Result<String, SolverError> {
    let col_names: Vec<String> = model.variables().iter().map(|v| sanitize(&v.name)).collect();
    let row_names: Vec<String> = model.constraints().iter().map(|c| sanitize(&c.name)).collect();
    let mut seen = HashSet::new();
    seen.insert(OBJECTIVE_ROW.to_string());
    for name in row_names.iter() {
        if !seen.insert(name.clone()) {
            return Err(SolverError::Backend(format!("MPS row name collision on '{name}'")));
        }
    }
    let mut seen_cols = HashSet::new();
    for name in &col_names {
        if !seen_cols.insert(name.clone()) {
            return Err(SolverError::Backend(format!("MPS column name collision on '{name}'")));
        }
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(v, a) in &c.terms {
            columns[v.0].push((i, a));
        }
    }

    let mut out = String::new();
    let name = if model.name.is_empty() { "model".to_string() } else { sanitize(&model.name) };
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    line(&mut out, "N", &[OBJECTIVE_ROW]);
    for (c, name) in model.constraints().iter().zip(&row_names) {
        let code = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(&mut out, code, &[name]);
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (j, var) in model.variables().iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            out.push_str(if is_int { INT_START } else { INT_END });
            out.push('\n');
            in_int = is_int;
        }
        let cost = model.objective()[j];
        if cost != 0.0 || columns[j].is_empty() {
            line(&mut out, "", &[&col_names[j], OBJECTIVE_ROW, &format_number(cost)]);
        }
        for &(i, a) in &columns[j] {
            line(&mut out, "", &[&col_names[j], &row_names[i], &format_number(a)]);
        }
    }
    if in_int {
        out.push_str(INT_END);
        out.push('\n');
    }

    out.push_str("RHS\n");
    for (c, name) in model.constraints().iter().zip(&row_names) {
        if c.rhs != 0.0 {
            line(&mut out, "", &["RHS", name, &format_number(c.rhs)]);
        }
    }
    out.push_str("RANGES\n");

    out.push_str("BOUNDS\n");
    for (var, name) in model.variables().iter().zip(&col_names) {
        let (lo, up) = (var.lower, var.upper);
        if var.kind == VarKind::Binary && lo == 0.0 && up == 1.0 {
            line(&mut out, "BV", &["BND", name]);
        } else if var.is_free() {
            line(&mut out, "FR", &["BND", name]);
        } else if lo == up {
            line(&mut out, "FX", &["BND", name, &format_number(lo)]);
        } else {
            if lo == f64::NEG_INFINITY {
                line(&mut out, "MI", &["BND", name]);
            } else if lo != 0.0 {
                line(&mut out, "LO", &["BND", name, &format_number(lo)]);
            }
            if up.is_finite() {
                line(&mut out, "UP", &["BND", name, &format_number(up)]);
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn export_mps(model: &MilpModel, path: impl AsRef<Path>) -> Result<(), SolverError> {
    let path = path.as_ref();
    let text = write_mps(model)?;
    fs::write(path, text).map_err(|source| SolverError::Io { path: path.to_path_buf(), source })
}
