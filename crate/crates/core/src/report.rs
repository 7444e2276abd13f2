//! Versioned JSON report documents.
//!
//! Objects are `serde_json` maps (sorted keys), so identical inputs give
//! byte-identical output. Elements are always written by name.

use serde::Serialize;
use serde_json::{json, Value};

use crate::iso::PartialIso;
use crate::structure::{Elem, Structure};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsUpToBounds,
    FailsWithWitness,
    Inconclusive,
}

impl Verdict {
    /// 0 when a verdict was produced, 2 when the window ran out.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Inconclusive => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    /// Every bound the verdict depends on (window size, radii, s, lengths).
    pub bounds: Value,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, verdict: Verdict, bounds: Value, result: Value) -> Self {
        Report {
            command: command.to_string(),
            verdict,
            bounds,
            result,
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "report_version": REPORT_VERSION,
            "command": self.command,
            "verdict": self.verdict,
            "bounds": self.bounds,
            "result": self.result,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("json values serialize");
        s.push('\n');
        s
    }
}

pub fn name(m: &Structure, e: Elem) -> Value {
    Value::String(m.name(e).to_string())
}

pub fn names(m: &Structure, es: &[Elem]) -> Value {
    es.iter().map(|&e| name(m, e)).collect()
}

/// A partial isomorphism as explicit (source, target) name pairs plus its
/// certification metadata.
pub fn partial_iso(source: &Structure, target: &Structure, p: &PartialIso) -> Value {
    json!({
        "source_anchor": source.name(p.source_anchor),
        "target_anchor": target.name(p.target_anchor),
        "certified_radius": p.certified_radius,
        "pairs": p.named(source, target),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_stable() {
        let r = Report::new(
            "census",
            Verdict::HoldsUpToBounds,
            json!({"h": 2, "elements": 5}),
            json!({"z": 1, "a": 2}),
        );
        let text = r.to_json();
        assert_eq!(text, r.to_json());
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"bounds\"") < pos("\"command\""));
        assert!(pos("\"command\"") < pos("\"report_version\""));
        assert!(pos("\"elements\"") < pos("\"h\""));
        assert!(text.contains("\"holds_up_to_bounds\""));
    }
}
