//! Experiment harness around `lps-core`: benchmark targets, config files,
//! seeded campaigns, polynomial-system text parsing, and CSV emission.

pub mod campaign;
pub mod config;
pub mod sysparse;
pub mod targets;
