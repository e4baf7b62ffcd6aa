//! Check results and the report file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Extremal eigenvalues of an operator compared against a target interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeCertificate {
    pub label: String,
    pub observed: [f64; 2],
    /// `[lo, hi]`; infinite ends are serialised as `null`.
    pub target: [Option<f64>; 2],
    pub tolerance: f64,
    pub pass: bool,
}

impl RangeCertificate {
    pub fn new(
        label: impl Into<String>,
        observed: (f64, f64),
        target: (f64, f64),
        tolerance: f64,
    ) -> Self {
        let (lo, hi) = target;
        let pass = observed.0 >= lo - tolerance && observed.1 <= hi + tolerance;
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            label: label.into(),
            observed: [observed.0, observed.1],
            target: [finite(lo), finite(hi)],
            tolerance,
            pass,
        }
    }

    /// Distance of the observed range outside the target interval.
    pub fn violation(&self) -> f64 {
        let lo = self.target[0].map_or(0.0, |lo| (lo - self.observed[0]).max(0.0));
        let hi = self.target[1].map_or(0.0, |hi| (self.observed[1] - hi).max(0.0));
        lo.max(hi)
    }
}

/// One verified statement.
///
/// `proof_residual` is the binding variant. When the statement as printed
/// differs from what its derivation establishes, `literal_residual` carries the
/// printed reading and is reported without affecting `pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub statement: String,
    pub literal_residual: Option<f64>,
    pub proof_residual: Option<f64>,
    pub certificate_ranges: Vec<RangeCertificate>,
    pub tolerance: f64,
    pub literal_pass: Option<bool>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, statement: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            statement: statement.into(),
            literal_residual: None,
            proof_residual: None,
            certificate_ranges: Vec::new(),
            tolerance,
            literal_pass: None,
            pass: true,
            details: BTreeMap::new(),
        }
    }

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.proof_residual = Some(residual);
        self
    }

    pub fn with_literal(mut self, residual: f64, pass: bool) -> Self {
        self.literal_residual = Some(residual);
        self.literal_pass = Some(pass);
        self
    }

    pub fn with_certificate(mut self, cert: RangeCertificate) -> Self {
        self.certificate_ranges.push(cert);
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Sets `pass` from the binding residual and every certificate.
    pub fn finish(mut self) -> Self {
        let residual_ok = self
            .proof_residual
            .is_none_or(|r| r.is_finite() && r <= self.tolerance);
        self.pass = residual_ok && self.certificate_ranges.iter().all(|c| c.pass);
        self
    }

    /// Marks the check failed regardless of residuals.
    pub fn fail(mut self) -> Self {
        self.pass = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCheck {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Results for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub instance: String,
    pub suite: String,
    pub entries: Vec<CheckReport>,
    #[serde(default)]
    pub skipped: Vec<SkippedCheck>,
    pub summary: Summary,
}

impl ReportFile {
    pub fn new(instance: impl Into<String>, suite: impl Into<String>) -> Self {
        Self {
            instance: instance.into(),
            suite: suite.into(),
            entries: Vec::new(),
            skipped: Vec::new(),
            summary: Summary {
                total: 0,
                passed: 0,
                failed: 0,
            },
        }
    }

    pub fn push(&mut self, entry: CheckReport) {
        self.entries.push(entry);
        self.recount();
    }

    pub fn skip(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.skipped.push(SkippedCheck {
            name: name.into(),
            reason: reason.into(),
        });
    }

    fn recount(&mut self) {
        let passed = self.entries.iter().filter(|e| e.pass).count();
        self.summary = Summary {
            total: self.entries.len(),
            passed,
            failed: self.entries.len() - passed,
        };
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "# {} ({})\n\n{} checks, {} passed, {} failed\n\n",
            self.instance, self.suite, self.summary.total, self.summary.passed, self.summary.failed
        );
        out.push_str("| check | statement | residual | literal | certificates | pass |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        let fmt = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.3e}"));
        for e in &self.entries {
            let certs = e
                .certificate_ranges
                .iter()
                .map(|c| format!("{} [{:.6}, {:.6}]", c.label, c.observed[0], c.observed[1]))
                .collect::<Vec<_>>()
                .join("; ");
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} |\n",
                e.name,
                e.statement,
                fmt(e.proof_residual),
                fmt(e.literal_residual),
                certs,
                if e.pass { "yes" } else { "NO" }
            ));
        }
        for s in &self.skipped {
            out.push_str(&format!("\nskipped `{}`: {}\n", s.name, s.reason));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_tolerance_edges() {
        let c = RangeCertificate::new("x", (-1e-11, 0.25 + 1e-11), (0.0, 0.25), 1e-10);
        assert!(c.pass);
        let c = RangeCertificate::new("x", (-1e-9, 0.1), (0.0, 0.25), 1e-10);
        assert!(!c.pass);
        assert!((c.violation() - 1e-9).abs() < 1e-20);
        let c = RangeCertificate::new("x", (1.0, 5.0), (0.75, f64::INFINITY), 0.0);
        assert!(c.pass);
        assert_eq!(c.target[1], None);
    }

    #[test]
    fn summary_tracks_entries() {
        let mut r = ReportFile::new("inst", "all");
        r.push(
            CheckReport::new("a", "s", 1e-10)
                .with_residual(1e-12)
                .finish(),
        );
        r.push(
            CheckReport::new("b", "s", 1e-10)
                .with_residual(1e-3)
                .finish(),
        );
        r.push(
            CheckReport::new("c", "s", 1e-10)
                .with_residual(f64::NAN)
                .finish(),
        );
        assert_eq!(
            r.summary,
            Summary {
                total: 3,
                passed: 1,
                failed: 2
            }
        );
        assert!(!r.all_passed());
        assert!(r.to_markdown().contains("| b |"));
    }
}
