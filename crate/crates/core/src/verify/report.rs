use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exact,
    MonteCarlo,
}

/// Outcome of one numeric check.
///
/// Exact reports carry zero statistical tolerance (any slack is numeric
/// truncation, stated in `tolerance`); Monte Carlo reports carry their trial
/// count and CI half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub mode: CheckMode,
    pub measured: BTreeMap<String, f64>,
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub trials: u64,
    pub ci_width: Option<f64>,
    pub passed: bool,
    pub detail: String,
}

impl VerificationReport {
    pub fn exact(check: impl Into<String>) -> Self {
        VerificationReport {
            check: check.into(),
            mode: CheckMode::Exact,
            measured: BTreeMap::new(),
            bound: None,
            tolerance: 0.0,
            trials: 0,
            ci_width: None,
            passed: true,
            detail: String::new(),
        }
    }

    pub fn monte_carlo(check: impl Into<String>, trials: u64) -> Self {
        VerificationReport {
            mode: CheckMode::MonteCarlo,
            trials,
            ..VerificationReport::exact(check)
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.measured.insert(name.to_string(), value);
        self
    }

    pub fn bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn ci(mut self, half_width: f64) -> Self {
        self.ci_width = Some(half_width);
        self
    }

    pub fn verdict(mut self, passed: bool, detail: impl Into<String>) -> Self {
        self.passed = passed;
        self.detail = detail.into();
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.measured.get(name).copied()
    }
}
