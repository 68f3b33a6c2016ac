use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// Identifies the report layout; bumped on any incompatible change.
pub const REPORT_SCHEMA: &str = "catwork.report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimResult {
    /// Stable identifier, `<suite>.<claim>`.
    pub id: String,
    /// The mathematical statement checked.
    pub anchor: &'static str,
    pub status: Status,
    pub detail: String,
    /// Data that refutes the claim, on failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    /// Data produced while checking, on success.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl ClaimResult {
    pub fn pass(id: &str, anchor: &'static str, detail: impl Into<String>) -> Self {
        ClaimResult { id: id.into(), anchor, status: Status::Pass, detail: detail.into(), counterexample: None, witness: None }
    }

    pub fn fail(id: &str, anchor: &'static str, detail: impl Into<String>, counterexample: Value) -> Self {
        ClaimResult {
            id: id.into(),
            anchor,
            status: Status::Fail,
            detail: detail.into(),
            counterexample: Some(counterexample),
            witness: None,
        }
    }

    pub fn skipped(id: &str, anchor: &'static str, reason: impl Into<String>) -> Self {
        ClaimResult { id: id.into(), anchor, status: Status::Skipped, detail: reason.into(), counterexample: None, witness: None }
    }

    pub fn with_witness(mut self, w: Value) -> Self {
        self.witness = Some(w);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub claims: Vec<ClaimResult>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub version: u32,
    pub command: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub brute_cap: usize,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
    pub pass: bool,
}

impl VerifyReport {
    pub fn new(scenario: &str, seed: u64, brute_cap: usize, suites: Vec<SuiteReport>) -> Self {
        let mut summary = Summary::default();
        for c in suites.iter().flat_map(|s| &s.claims) {
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        VerifyReport {
            schema: REPORT_SCHEMA,
            version: REPORT_VERSION,
            command: "verify",
            scenario: scenario.to_string(),
            seed,
            brute_cap,
            suites,
            pass: summary.failed == 0,
            summary,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} (seed {})\n", self.scenario, self.seed);
        for s in &self.suites {
            let _ = writeln!(out, "[{}]", s.suite);
            for c in &s.claims {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                let _ = writeln!(out, "  {tag} {}: {}", c.id, c.anchor);
                if !c.detail.is_empty() {
                    let _ = writeln!(out, "       {}", c.detail);
                }
                if let Some(cx) = &c.counterexample {
                    let _ = writeln!(out, "       counterexample: {cx}");
                }
            }
        }
        let s = &self.summary;
        let _ = writeln!(out, "{} passed, {} failed, {} skipped", s.passed, s.failed, s.skipped);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundtripRun {
    pub trial: usize,
    pub spec: String,
    pub expected: Vec<u32>,
    pub recovered: Vec<u32>,
    pub exact: bool,
    pub modulus: Vec<u32>,
    pub dominator: Vec<u32>,
    pub elements: usize,
    pub coding_oracle_calls: usize,
    pub s_omega_oracle_calls: usize,
    pub s_omega_components: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundtripReport {
    pub schema: &'static str,
    pub version: u32,
    pub command: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub trials: usize,
    pub recovered: usize,
    pub runs: Vec<RoundtripRun>,
    pub pass: bool,
}

impl RoundtripReport {
    pub fn new(scenario: &str, seed: u64, runs: Vec<RoundtripRun>) -> Self {
        let recovered = runs.iter().filter(|r| r.exact).count();
        RoundtripReport {
            schema: REPORT_SCHEMA,
            version: REPORT_VERSION,
            command: "roundtrip",
            scenario: scenario.to_string(),
            seed,
            trials: runs.len(),
            recovered,
            pass: recovered == runs.len(),
            runs,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} (seed {})\n", self.scenario, self.seed);
        for r in self.runs.iter().filter(|r| !r.exact) {
            let _ = writeln!(
                out,
                "  FAIL trial {}: {} expected {:?} recovered {:?}{}",
                r.trial,
                r.spec,
                r.expected,
                r.recovered,
                r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
            );
        }
        let calls: usize = self.runs.iter().map(|r| r.coding_oracle_calls + r.s_omega_oracle_calls).sum();
        let _ = writeln!(out, "{}/{} recovered, {calls} classifier calls", self.recovered, self.trials);
        out
    }
}
