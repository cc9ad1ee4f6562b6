//! Verdicts for "hypotheses imply conclusion" checks on concrete fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// The check's own preconditions (domain, bounds) failed; nothing was tested.
    PreconditionViolated,
    /// Some hypothesis failed, so the implication holds vacuously.
    Vacuous,
    /// Hypotheses and conclusion hold.
    Holds,
    /// Hypotheses hold and the conclusion fails.
    Refuted,
}

impl Outcome {
    pub fn is_refuted(self) -> bool {
        self == Outcome::Refuted
    }
}

pub type Values = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub check: String,
    pub precondition_values: Values,
    pub precondition_satisfied: bool,
    pub hypothesis_values: Values,
    pub hypothesis_satisfied: bool,
    pub conclusion_values: Values,
    pub conclusion_satisfied: bool,
    pub tolerances: Values,
    pub cell_width: f64,
    /// Reported but never gated.
    pub diagnostics: Values,
    pub outcome: Outcome,
}

/// Incremental builder; [`VerdictBuilder::finish`] derives the outcome.
#[derive(Debug, Clone)]
pub struct VerdictBuilder {
    v: LemmaVerdict,
}

impl VerdictBuilder {
    pub fn new(check: &str, cell_width: f64) -> Self {
        Self {
            v: LemmaVerdict {
                check: check.to_string(),
                precondition_values: Values::new(),
                precondition_satisfied: true,
                hypothesis_values: Values::new(),
                hypothesis_satisfied: true,
                conclusion_values: Values::new(),
                conclusion_satisfied: true,
                tolerances: Values::new(),
                cell_width,
                diagnostics: Values::new(),
                outcome: Outcome::Holds,
            },
        }
    }

    pub fn precondition(&mut self, name: &str, value: f64, ok: bool) -> &mut Self {
        self.v.precondition_values.insert(name.into(), value);
        self.v.precondition_satisfied &= ok;
        self
    }

    pub fn hypothesis(&mut self, name: &str, value: f64, ok: bool) -> &mut Self {
        self.v.hypothesis_values.insert(name.into(), value);
        self.v.hypothesis_satisfied &= ok;
        self
    }

    pub fn conclusion(&mut self, name: &str, value: f64, ok: bool) -> &mut Self {
        self.v.conclusion_values.insert(name.into(), value);
        self.v.conclusion_satisfied &= ok;
        self
    }

    pub fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.v.tolerances.insert(name.into(), value);
        self
    }

    pub fn diagnostic(&mut self, name: &str, value: f64) -> &mut Self {
        self.v.diagnostics.insert(name.into(), value);
        self
    }

    pub fn precondition_ok(&self) -> bool {
        self.v.precondition_satisfied
    }

    pub fn finish(mut self) -> LemmaVerdict {
        self.v.outcome = if !self.v.precondition_satisfied {
            Outcome::PreconditionViolated
        } else if !self.v.hypothesis_satisfied {
            Outcome::Vacuous
        } else if self.v.conclusion_satisfied {
            Outcome::Holds
        } else {
            Outcome::Refuted
        };
        self.v
    }
}
