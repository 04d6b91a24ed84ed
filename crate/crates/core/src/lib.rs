//! Two-stage stochastic capacity expansion planning for multi-product
//! biomass facilities, with power-law investment costs and a CVaR-weighted
//! objective.

pub mod analysis;
pub mod capex;
pub mod case;
pub mod cli;
pub mod error;
pub mod milp;
pub mod model;
pub mod program;
pub mod report;
pub mod scenario;
pub mod solver;
