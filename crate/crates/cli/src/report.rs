use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

pub const SCHEMA: &str = "dendron-report/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, passed: bool, cases: usize, witness: Option<String>) -> Self {
        CheckResult { name: name.into(), passed, cases, witness: if passed { None } else { witness.or(Some("no witness recorded".into())) } }
    }

    /// A mutation check passes when the corrupted fixture is rejected with a
    /// witness.
    pub fn detects(name: impl Into<String>, rejected: bool, witness: Option<String>) -> Self {
        let caught = rejected && witness.is_some();
        let why = if rejected { "rejected without a witness" } else { "the mutation was accepted" };
        CheckResult::new(name, caught, 1, Some(why.into()))
    }
}

/// A suite run. Wall time is printed by the human rendering only, so the
/// JSON is byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub suite: String,
    pub bounds: BTreeMap<String, usize>,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replay: Vec<String>,
}

impl VerificationReport {
    pub fn new(suite: &str, bounds: BTreeMap<String, usize>, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        let flags: Vec<String> = bounds.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let replay = if passed { Vec::new() } else { vec![format!("dendron suite {suite} --bounds {}", flags.join(","))] };
        VerificationReport { schema: SCHEMA, suite: suite.to_string(), bounds, passed, checks, replay }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let flags: Vec<String> = self.bounds.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "suite {} [{}]", self.suite, flags.join(","));
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  {mark} {} ({} cases)", c.name, c.cases);
            if let Some(w) = &c.witness {
                let _ = writeln!(out, "       witness: {w}");
            }
        }
        for r in &self.replay {
            let _ = writeln!(out, "  replay: {r}");
        }
        let _ = writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}
