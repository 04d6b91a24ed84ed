//! Reports and studies on top of solved models: dispatch and risk metrics,
//! the viability-price bisection, and the risk frontier.

pub mod cvar;
pub mod dispatch;
pub mod frontier;
pub mod plan;
pub mod sensitivity;

pub use cvar::{discrete_cvar, expectation, rockafellar_uryasev, value_at_risk};
pub use dispatch::{dispatch_scenario, evaluate_dispatch, DispatchReport, ProductFlow, RiskReport, ScenarioDispatch};
pub use frontier::{check_frontier, frontier_csv, risk_frontier, FrontierPoint};
pub use plan::{assemble_plan, solve_case, solve_extensive, ObjectiveDecomposition, PlanSolution, PlantDecision};
pub use sensitivity::{min_viable_price, viability_at, SensitivityResult, ViabilityCheck};
