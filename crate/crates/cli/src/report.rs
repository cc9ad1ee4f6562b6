//! Report documents written as `report.json`.

use std::collections::BTreeMap;

use hjreg_core::oscillation::{validate_chain, ConstantChain, InvariantSlack};
use hjreg_core::verdict::{LemmaVerdict, Outcome};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::scenarios::Scenario;

/// Bumped whenever a report field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Refuted,
    Vacuous,
    Error,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass | Status::Vacuous => 0,
            Status::Refuted => 1,
            Status::Error => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<LemmaVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl CheckReport {
    pub fn from_verdict(name: &str, v: LemmaVerdict) -> Self {
        Self { name: name.into(), outcome: v.outcome, verdict: Some(v), details: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    #[serde(flatten)]
    pub chain: ConstantChain,
    pub invariants: Vec<InvariantSlack>,
}

impl From<ConstantChain> for ChainReport {
    fn from(chain: ConstantChain) -> Self {
        let invariants = validate_chain(&chain);
        Self { chain, invariants }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub seed: u64,
    pub status: Status,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckReport>,
    pub chain: Option<ChainReport>,
    pub extras: Map<String, Value>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
    pub timings: BTreeMap<String, f64>,
}

/// Refuted beats everything; otherwise any holding check makes a pass, and
/// a run whose checks are all vacuous or unmet preconditions is vacuous.
/// Runs without checks (pure reports) pass.
pub fn status_of(checks: &[CheckReport]) -> Status {
    if checks.iter().any(|c| c.outcome.is_refuted()) {
        Status::Refuted
    } else if checks.is_empty() || checks.iter().any(|c| c.outcome == Outcome::Holds) {
        Status::Pass
    } else {
        Status::Vacuous
    }
}

/// Report JSON with the `timings` block removed, for byte comparisons.
pub fn without_timings(json: &str) -> serde_json::Result<String> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Value::Object(m) = &mut v {
        m.remove("timings");
    }
    serde_json::to_string_pretty(&v)
}
