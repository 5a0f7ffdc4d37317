//! Check reports shared by the verification suites.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
    /// Listed for completeness; nothing was evaluated.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn pass(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            status: Status::Pass,
            detail: None,
        }
    }

    pub fn skipped(id: impl Into<String>, why: &str) -> Self {
        Self {
            id: id.into(),
            status: Status::Skipped,
            detail: Some(why.into()),
        }
    }

    /// `Ok(None)` passes, `Ok(Some(d))` fails with detail `d`, `Err` is an error.
    pub fn from_outcome(id: impl Into<String>, outcome: crate::Result<Option<String>>) -> Self {
        let (status, detail) = match outcome {
            Ok(None) => (Status::Pass, None),
            Ok(Some(d)) => (Status::Fail, Some(d)),
            Err(e) => (Status::Error, Some(e.to_string())),
        };
        Self {
            id: id.into(),
            status,
            detail,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Skipped)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl Report {
    /// Checks are sorted by id so output does not depend on scheduling.
    pub fn new(suite: impl Into<String>, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        Self {
            suite: suite.into(),
            checks,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(CheckResult::is_ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.is_ok())
    }
}
