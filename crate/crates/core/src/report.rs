//! Pass/fail records produced by the verification suites.

use serde::{Deserialize, Serialize};

use crate::algebra::FormalFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One identity check: the residual is a canonical polynomial string, `"0"` on pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub residual: String,
    pub witness: String,
}

impl CheckRecord {
    pub fn pass(name: impl Into<String>, witness: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Pass,
            residual: "0".into(),
            witness: witness.into(),
        }
    }

    pub fn fail(
        name: impl Into<String>,
        residual: impl Into<String>,
        witness: impl Into<String>,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Fail,
            residual: residual.into(),
            witness: witness.into(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Skipped,
            residual: "0".into(),
            witness: reason.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Accumulates the first failing residual over many instances of one identity.
#[derive(Debug)]
pub struct Check {
    name: String,
    count: usize,
    failure: Option<(String, String)>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            count: 0,
            failure: None,
        }
    }

    /// Record a residual that must vanish through its valid order.
    pub fn formal(&mut self, residual: &FormalFunction, witness: impl FnOnce() -> String) {
        self.count += 1;
        if self.failure.is_none() && !residual.is_zero_mod_valid() {
            self.failure = Some((residual.reliable_part().to_string(), witness()));
        }
    }

    /// Record a residual given as a display string and a zero test.
    pub fn value(&mut self, is_zero: bool, residual: impl FnOnce() -> String, witness: impl FnOnce() -> String) {
        self.count += 1;
        if self.failure.is_none() && !is_zero {
            self.failure = Some((residual(), witness()));
        }
    }

    pub fn error(&mut self, message: String, witness: impl FnOnce() -> String) {
        self.count += 1;
        if self.failure.is_none() {
            self.failure = Some((message, witness()));
        }
    }

    pub fn finish(self) -> CheckRecord {
        match self.failure {
            Some((residual, witness)) => CheckRecord::fail(self.name, residual, witness),
            None => CheckRecord::pass(self.name, format!("{} instances", self.count)),
        }
    }
}
