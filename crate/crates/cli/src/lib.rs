//! Experiment assembly for the `hjreg` command: configuration files, scenario
//! drivers, run directories and ensemble aggregation.

pub mod config;
pub mod report;
pub mod runner;
pub mod scenarios;

pub use config::{parse_config, parse_config_str, CheckKind, ConfigError, ExperimentConfig};
pub use report::{RunReport, Status};
pub use runner::{ensemble, run, EnsembleReport, RunError};
pub use scenarios::Scenario;

/// Pretty JSON of the constant chain with its invariant slacks.
pub fn oscillation_chain_json(n: usize, p: f64, lambda: f64, alpha: f64) -> hjreg_core::Result<String> {
    let chain = hjreg_core::oscillation::build_constant_chain(n, p, lambda, alpha)?;
    Ok(serde_json::to_string_pretty(&report::ChainReport::from(chain))?)
}
