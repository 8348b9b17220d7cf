//! Machine- and human-readable result documents for the CLI.

use crate::entropy::EntropyReport;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// One verified equality or inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity or inequality the check instantiates, in formula form.
    pub law: String,
    pub lhs: serde_json::Value,
    pub rhs: serde_json::Value,
    pub tolerance: f64,
    pub pass: bool,
}

/// A batch of checks run by one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub passed: usize,
    pub failed: usize,
}

impl VerificationReport {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        VerificationReport {
            command: command.to_string(),
            config_hash,
            seed,
            checks: Vec::new(),
            passed: 0,
            failed: 0,
        }
    }

    pub fn push_numeric(&mut self, name: String, law: &str, lhs: f64, rhs: f64, tol: f64) {
        let pass = (lhs - rhs).abs() <= tol;
        self.push(CheckRecord {
            name,
            law: law.to_string(),
            lhs: json!(lhs),
            rhs: json!(rhs),
            tolerance: tol,
            pass,
        });
    }

    pub fn push_exact(&mut self, name: String, law: &str, lhs: String, rhs: String, pass: bool) {
        self.push(CheckRecord {
            name,
            law: law.to_string(),
            lhs: json!(lhs),
            rhs: json!(rhs),
            tolerance: 0.0,
            pass,
        });
    }

    pub fn push(&mut self, check: CheckRecord) {
        if check.pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{}  (config {}, seed {})\n",
            self.command, self.config_hash, self.seed
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<40} {}   lhs={} rhs={} tol={:e}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.law,
                c.lhs,
                c.rhs,
                c.tolerance
            ));
        }
        out.push_str(&format!(
            "{} checks: {} passed, {} failed\n",
            self.checks.len(),
            self.passed,
            self.failed
        ));
        out
    }
}

/// Envelope for an entropy computation, with the display base recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDocument {
    pub command: String,
    pub config_hash: String,
    pub log_base: String,
    pub report: EntropyReport,
}

/// Rescales a report from nats into bits for display.
pub fn rescale_bits(report: &EntropyReport) -> EntropyReport {
    let k = std::f64::consts::LN_2;
    let mut r = report.clone();
    r.value /= k;
    r.base_entropy /= k;
    for t in &mut r.terms {
        t.join_entropy /= k;
    }
    for v in &mut r.sequence {
        *v /= k;
    }
    r
}

pub fn render_entropy(doc: &EntropyDocument) -> String {
    let r = &doc.report;
    let mut out = String::new();
    out.push_str(&format!(
        "{}  (config {}, output in {})\n",
        doc.command, doc.config_hash, doc.log_base
    ));
    out.push_str(&format!("  value          {:+.10}\n", r.value));
    out.push_str(&format!("  base entropy   {:+.10}\n", r.base_entropy));
    for t in &r.terms {
        out.push_str(&format!("  term {:<10} {:+.10}\n", t.gen, t.join_entropy));
    }
    if !r.sequence.is_empty() {
        let seq: Vec<String> = r.sequence.iter().map(|v| format!("{v:+.10}")).collect();
        out.push_str(&format!("  ball sequence  [{}]\n", seq.join(", ")));
    }
    out.push_str(&format!("  stabilized     {}\n", r.stabilized));
    out
}
