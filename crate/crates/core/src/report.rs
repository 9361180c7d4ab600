//! Deterministic validation reports.
//!
//! Every structural check in the library returns a [`ValidationReport`]
//! rather than panicking: axiom violations are data, each with a stable code
//! and a witness naming the offending arrows or points.

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub code: String,
    pub witness: String,
    pub message: String,
}

impl Finding {
    pub fn new(code: &str, witness: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            code: code.to_string(),
            witness: witness.into(),
            message: message.into(),
        }
    }
}

/// Outcome of a structural validation: violations plus informational notes.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub notes: Vec<Finding>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn violation(&mut self, code: &str, witness: impl Into<String>, msg: impl Into<String>) {
        self.findings.push(Finding::new(code, witness, msg));
    }

    pub fn note(&mut self, code: &str, witness: impl Into<String>, msg: impl Into<String>) {
        self.notes.push(Finding::new(code, witness, msg));
    }

    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
        self.notes.extend(other.notes);
    }

    /// Sorts findings lexicographically by (code, witness); call before display.
    pub fn normalize(&mut self) {
        self.findings.sort();
        self.findings.dedup();
        self.notes.sort();
        self.notes.dedup();
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn witnesses_mentioning(&self, id: &str) -> bool {
        self.findings.iter().any(|f| f.witness.contains(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violations,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violations => 1,
            Status::Error => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Violations => "violations",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub value: f64,
    pub tolerance: Option<f64>,
}

/// A complete command outcome: status, sorted findings and named metrics.
#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub findings: Vec<Finding>,
    pub notes: Vec<Finding>,
    pub metrics: BTreeMap<String, Metric>,
}

impl Report {
    pub fn ok() -> Self {
        Report {
            status: Status::Ok,
            findings: Vec::new(),
            notes: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        let mut r = Report::ok();
        r.status = Status::Error;
        r.findings.push(Finding::new("error", "", message));
        r
    }

    pub fn from_validation(mut v: ValidationReport) -> Self {
        v.normalize();
        Report {
            status: if v.is_ok() {
                Status::Ok
            } else {
                Status::Violations
            },
            findings: v.findings,
            notes: v.notes,
            metrics: BTreeMap::new(),
        }
    }

    pub fn metric(&mut self, name: &str, value: f64, tolerance: Option<f64>) {
        self.metrics
            .insert(name.to_string(), Metric { value, tolerance });
    }

    /// 12 significant digits, fixed scientific form; byte-stable.
    pub fn format_float(x: f64) -> String {
        if x == 0.0 {
            return "0.00000000000e0".to_string();
        }
        format!("{:.11e}", x)
    }

    pub fn emit_text(&self) -> String {
        let mut out = String::new();
        match self.status {
            Status::Ok => {
                let _ = writeln!(out, "OK ({} findings)", self.findings.len());
            }
            Status::Violations => {
                let _ = writeln!(out, "VIOLATIONS ({} findings)", self.findings.len());
            }
            Status::Error => {
                let _ = writeln!(out, "ERROR");
            }
        }
        for f in &self.findings {
            let _ = writeln!(out, "  [{}] {} :: {}", f.code, f.witness, f.message);
        }
        for n in &self.notes {
            let _ = writeln!(out, "  (note) [{}] {} :: {}", n.code, n.witness, n.message);
        }
        for (name, m) in &self.metrics {
            match m.tolerance {
                Some(t) => {
                    let _ = writeln!(
                        out,
                        "  metric {} = {} (tol {})",
                        name,
                        Self::format_float(m.value),
                        Self::format_float(t)
                    );
                }
                None => {
                    let _ = writeln!(out, "  metric {} = {}", name, Self::format_float(m.value));
                }
            }
        }
        out
    }

    pub fn emit_json(&self) -> String {
        let mut root = serde_json::Map::new();
        root.insert(
            "status".to_string(),
            serde_json::Value::String(self.status.label().to_string()),
        );
        let findings: Vec<serde_json::Value> = self
            .findings
            .iter()
            .map(|f| {
                serde_json::json!({
                    "code": f.code,
                    "witness": f.witness,
                    "message": f.message,
                })
            })
            .collect();
        root.insert("findings".to_string(), serde_json::Value::Array(findings));
        let notes: Vec<serde_json::Value> = self
            .notes
            .iter()
            .map(|f| {
                serde_json::json!({
                    "code": f.code,
                    "witness": f.witness,
                    "message": f.message,
                })
            })
            .collect();
        root.insert("notes".to_string(), serde_json::Value::Array(notes));
        let mut metrics = serde_json::Map::new();
        for (name, m) in &self.metrics {
            let mut entry = serde_json::Map::new();
            entry.insert(
                "value".to_string(),
                serde_json::Value::String(Self::format_float(m.value)),
            );
            if let Some(t) = m.tolerance {
                entry.insert(
                    "tolerance".to_string(),
                    serde_json::Value::String(Self::format_float(t)),
                );
            }
            metrics.insert(name.clone(), serde_json::Value::Object(entry));
        }
        root.insert("metrics".to_string(), serde_json::Value::Object(metrics));
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("json emit")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_sort_deterministically() {
        let mut v = ValidationReport::new();
        v.violation("b-code", "w2", "second");
        v.violation("a-code", "w1", "first");
        v.violation("a-code", "w0", "zeroth");
        v.normalize();
        let codes: Vec<&str> = v
            .findings
            .iter()
            .map(|f| (f.witness.as_str()))
            .collect();
        assert_eq!(codes, vec!["w0", "w1", "w2"]);
    }

    #[test]
    fn ok_report_text() {
        let r = Report::ok();
        assert_eq!(r.emit_text(), "OK (0 findings)\n");
        assert_eq!(r.status.exit_code(), 0);
    }
}
