//! Verification reports shared by the suites and the CLI.

use serde::{Deserialize, Serialize};

use crate::hochschild::CochainJson;

/// One verified property: `pass ⇔ residual ≤ tolerance`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<CochainJson>,
}

impl CheckEntry {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        // NaN residuals never pass
        let pass = residual <= tolerance;
        Self {
            check: check.into(),
            residual,
            tolerance,
            pass,
            witness: None,
        }
    }

    /// A boolean fact recorded as residual 0 (holds) or 1 (fails) against tolerance 0.
    pub fn flag(check: impl Into<String>, holds: bool) -> Self {
        Self::new(check, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn with_witness(mut self, witness: Option<CochainJson>) -> Self {
        self.witness = witness;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("entry serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub entries: Vec<CheckEntry>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, config: serde_json::Value, seed: u64) -> Self {
        Self {
            suite: suite.into(),
            entries: Vec::new(),
            config,
            seed,
            wall_time_s: 0.0,
        }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = CheckEntry>) {
        self.entries.extend(entries);
    }

    /// Orders entries by check name so output does not depend on execution order.
    pub fn finalize(&mut self) {
        self.entries.sort_by(|a, b| a.check.cmp(&b.check));
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn entry(&self, check: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.check == check)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without the wall-time field; identical inputs give identical bytes.
    pub fn body_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_time_s");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_residual_within_tolerance() {
        assert!(CheckEntry::new("a", 1e-13, 1e-12).pass);
        assert!(!CheckEntry::new("a", 1e-11, 1e-12).pass);
        assert!(!CheckEntry::new("a", f64::NAN, 1.0).pass);
        assert!(CheckEntry::flag("f", true).pass);
        assert!(!CheckEntry::flag("f", false).pass);
    }

    #[test]
    fn body_omits_wall_time_and_sorts() {
        let mut r = VerificationReport::new("s", serde_json::json!({"n": 1}), 7);
        r.push(CheckEntry::new("b", 0.0, 1.0));
        r.push(CheckEntry::new("a", 0.0, 1.0));
        r.wall_time_s = 3.5;
        r.finalize();
        assert_eq!(r.entries[0].check, "a");
        assert!(!r.body_json().contains("wall_time_s"));
        assert!(r.to_json_pretty().contains("wall_time_s"));
    }

    #[test]
    fn entry_json_shape() {
        let e = CheckEntry::new("leibniz", 0.0, 1e-10);
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        for key in ["check", "residual", "tolerance", "pass"] {
            assert!(v.get(key).is_some());
        }
        assert!(v.get("witness").is_none());
    }
}
