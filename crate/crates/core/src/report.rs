//! Structured outcomes: condition checks and suite reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PassOnGrid,
    FailWithWitness,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::PassOnGrid
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::PassOnGrid
        } else {
            Verdict::FailWithWitness
        }
    }
}

/// Outcome of a growth-function or sequence condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub condition: String,
    pub verdict: Verdict,
    /// Grid size or largest sequence index examined.
    pub n_max: usize,
    pub witness: BTreeMap<String, f64>,
    pub counterexample: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    pub fn new(condition: impl Into<String>, verdict: Verdict, n_max: usize) -> Self {
        CheckResult {
            condition: condition.into(),
            verdict,
            n_max,
            witness: BTreeMap::new(),
            counterexample: BTreeMap::new(),
            note: None,
        }
    }

    pub fn pass(condition: impl Into<String>, n_max: usize) -> Self {
        Self::new(condition, Verdict::PassOnGrid, n_max)
    }

    pub fn fail(condition: impl Into<String>, n_max: usize) -> Self {
        Self::new(condition, Verdict::FailWithWitness, n_max)
    }

    pub fn with_witness(mut self, key: &str, value: f64) -> Self {
        self.witness.insert(key.to_string(), value);
        self
    }

    pub fn with_counterexample(mut self, key: &str, value: f64) -> Self {
        self.counterexample.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// One checked case inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub label: String,
    pub passed: bool,
    /// Signed slack of the checked inequality; negative means violated.
    pub margin: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub values: BTreeMap<String, f64>,
}

impl CaseResult {
    pub fn new(label: impl Into<String>, margin: f64) -> Self {
        CaseResult {
            label: label.into(),
            passed: margin >= 0.0,
            margin,
            values: BTreeMap::new(),
        }
    }

    /// `exp(log_lhs) ≤ exp(log_rhs)` with margin `1 - lhs/rhs`, passing down
    /// to `-tol`. Two zero sides give margin 0.
    pub fn log_le(label: impl Into<String>, log_lhs: f64, log_rhs: f64, tol: f64) -> Self {
        let margin = log_margin(log_lhs, log_rhs);
        CaseResult {
            label: label.into(),
            passed: margin >= -tol,
            margin,
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }
}

/// Relative slack `1 - lhs/rhs` from logs.
pub fn log_margin(log_lhs: f64, log_rhs: f64) -> f64 {
    if log_lhs == f64::NEG_INFINITY {
        return if log_rhs == f64::NEG_INFINITY { 0.0 } else { 1.0 };
    }
    -(log_lhs - log_rhs).exp_m1()
}

/// Outcome of a named verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub statement: String,
    pub trials: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub cases: Vec<CaseResult>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
}

impl VerificationReport {
    pub fn new(suite: &str, statement: &str, seed: u64, tolerance: f64) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            statement: statement.to_string(),
            trials: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            seed,
            tolerance,
            cases: Vec::new(),
            parameters: BTreeMap::new(),
            timestamp: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
        self
    }

    pub fn push(&mut self, case: CaseResult) {
        self.trials += 1;
        if !case.passed {
            self.violations += 1;
        }
        if case.margin < self.worst_margin || self.worst_margin.is_nan() {
            self.worst_margin = case.margin;
        }
        self.cases.push(case);
    }

    pub fn extend(&mut self, cases: impl IntoIterator<Item = CaseResult>) {
        for c in cases {
            self.push(c);
        }
    }

    /// Records a case that could not be computed as a violation.
    pub fn push_error(&mut self, label: impl Into<String>, err: &crate::Error) {
        let mut c = CaseResult::new(label, f64::NEG_INFINITY);
        c.label = format!("{}: {err}", c.label);
        self.push(c);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.trials > 0
    }

    /// Compact JSON without the timestamp, for determinism comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.timestamp = None;
        serde_json::to_string(&r).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_tracks_worst_margin() {
        let mut r = VerificationReport::new("x", "y", 1, 1e-9);
        r.push(CaseResult::new("a", 0.5));
        r.push(CaseResult::new("b", -0.25));
        assert_eq!(r.trials, 2);
        assert_eq!(r.violations, 1);
        assert_eq!(r.worst_margin, -0.25);
        assert!(!r.passed());
    }

    #[test]
    fn log_margins() {
        assert_eq!(log_margin(f64::NEG_INFINITY, f64::NEG_INFINITY), 0.0);
        assert_eq!(log_margin(f64::NEG_INFINITY, 0.0), 1.0);
        assert!((log_margin(0.0, 2f64.ln()) - 0.5).abs() < 1e-15);
        assert!(CaseResult::log_le("x", 1e-12, 0.0, 1e-10).passed);
        assert!(!CaseResult::log_le("x", 1e-8, 0.0, 1e-10).passed);
        assert!(!CaseResult::log_le("x", f64::NAN, 0.0, 1e-10).passed);
    }

    #[test]
    fn canonical_json_drops_timestamp() {
        let mut a = VerificationReport::new("x", "y", 1, 1e-9);
        let mut b = a.clone();
        a.timestamp = Some("t1".into());
        b.timestamp = Some("t2".into());
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
