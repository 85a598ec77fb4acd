//! Library surface of the eulerlax command-line harness: experiment
//! configuration, report types, and the verification suites the binary
//! dispatches to. Kept as a library so integration and acceptance tests can
//! run suites in-process.

pub mod config;
pub mod report;
pub mod suites;

pub use config::ExperimentConfig;
pub use report::{ResidualEntry, ResidualReport};
pub use suites::{convergence_study, run_suite, UsageError};
