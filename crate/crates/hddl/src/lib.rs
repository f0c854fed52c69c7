//! Toolchain for HDDL, the hierarchical extension of PDDL: parsing,
//! validation, grounding, plan verification and a baseline progression
//! planner.

pub mod diag;
pub mod exec;
pub mod ground;
pub mod model;
pub mod planner;
pub mod span;
pub mod syntax;
pub mod verify;
