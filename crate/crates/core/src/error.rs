use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("price table: {0}")]
    Csv(String),
    #[error("case is invalid:\n{0}")]
    Validation(ValidationReport),
    #[error("override: {0}")]
    Override(String),
}

impl CaseError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CaseError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapexError {
    #[error("capacity {0} is negative")]
    NegativeCapacity(f64),
    #[error("expansion {y} outside [0, {limit}]")]
    ExpansionOutOfDomain { y: f64, limit: f64 },
    #[error("capacity {c} outside breakpoint domain [{lo}, {hi}]")]
    OutsideBreakpoints { c: f64, lo: f64, hi: f64 },
    #[error("annuity needs rate > 0 and at least one year (got rate {rate}, {years} years)")]
    InvalidAnnuity { rate: f64, years: u32 },
    #[error("degenerate domain: max capacity equals initial capacity {0}")]
    DegenerateDomain(f64),
    #[error("segment count must be at least 1")]
    NoSegments,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("plant '{0}' has no breakpoints")]
    MissingBreakpoints(String),
    #[error("alpha must be < 1")]
    AlphaOne,
    #[error("invalid risk configuration: {0}")]
    Risk(String),
    #[error("capacity of plant '{plant}' is {capacity}, below its initial capacity {initial}")]
    CapacityBelowInitial { plant: String, capacity: f64, initial: f64 },
    #[error("capacity of plant '{plant}' is {capacity}, above its maximum {max}")]
    CapacityAboveMax { plant: String, capacity: f64, max: f64 },
    #[error("scenario {scenario} has no price for sellable product '{product}'")]
    MissingPrice { product: String, scenario: usize },
    #[error("scenario {0} does not exist")]
    UnknownScenario(usize),
    #[error("capacity vector has {got} entries for {expected} plants")]
    CapacityCount { got: usize, expected: usize },
    #[error("duplicate variable or row name '{0}'")]
    DuplicateName(String),
    #[error(transparent)]
    Capex(#[from] CapexError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("model has binary variable '{0}'; use the MILP entry point")]
    UnexpectedBinary(String),
    #[error("binary variables are not grouped as one segment block per plant")]
    UnsupportedStructure,
    #[error("{combos} segment combinations exceed the enumeration cap {cap}")]
    CapExceeded { combos: f64, cap: u64 },
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error("external solver: {0}")]
    Backend(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("solution file line {line}: {message}")]
    SolutionFormat { line: usize, message: String },
    #[error("unknown variable '{0}' in solution file")]
    UnknownVariable(String),
    #[error("solution file is empty")]
    EmptySolution,
    #[error("solution rejected: {0}")]
    Rejected(String),
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("alpha must be < 1")]
    AlphaOne,
    #[error("{values} values but {probabilities} probabilities")]
    LengthMismatch { values: usize, probabilities: usize },
    #[error("bracket invalid: {0}")]
    BracketInvalid(String),
    #[error("viability is not monotone in price: {0}")]
    NonMonotone(String),
    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error("frontier is not monotone: {0}")]
    FrontierNotMonotone(String),
    #[error("solver finished with status {0}")]
    NotOptimal(crate::solver::Status),
    #[error("unknown {kind} '{id}'")]
    Unknown { kind: &'static str, id: String },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Case(#[from] CaseError),
}
