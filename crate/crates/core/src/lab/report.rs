use serde::{Deserialize, Serialize};

use crate::ucond::{CertificateStatus, CertificateSummary};

/// Crate version stamped into reports.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs_summary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs_summary: Option<String>,
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
    /// `null` for checks that do not integrate through the engine.
    pub certificate_status: Option<CertificateStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
}

impl CheckRecord {
    /// Non-finite errors are recorded as `f64::MAX` and fail.
    pub fn new(name: impl Into<String>, abs_err: f64, tol: f64) -> Self {
        let abs_err = if abs_err.is_finite() { abs_err } else { f64::MAX };
        CheckRecord {
            name: name.into(),
            lhs_summary: None,
            rhs_summary: None,
            abs_err,
            tol,
            pass: abs_err <= tol,
            certificate_status: None,
            certificate: None,
        }
    }

    /// A yes/no property: error 0 when it holds, 1 otherwise, tolerance 0.
    pub fn predicate(name: impl Into<String>, holds: bool) -> Self {
        Self::new(name, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    /// A check whose computation itself failed.
    pub fn failed(name: impl Into<String>, tol: f64, why: impl Into<String>) -> Self {
        Self::new(name, f64::MAX, tol).lhs(why)
    }

    pub fn lhs(mut self, s: impl Into<String>) -> Self {
        self.lhs_summary = Some(s.into());
        self
    }

    pub fn rhs(mut self, s: impl Into<String>) -> Self {
        self.rhs_summary = Some(s.into());
        self
    }

    pub fn status(mut self, s: CertificateStatus) -> Self {
        self.certificate_status = Some(s);
        self
    }

    pub fn certificate(mut self, c: CertificateSummary) -> Self {
        self.certificate_status = Some(c.status);
        self.certificate = Some(c);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(id: String, kind: String, seed: u64, checks: Vec<CheckRecord>, wall_time_ms: f64) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report { id, kind, version: ARTIFACT_VERSION.to_string(), seed, checks, pass, wall_time_ms }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON with the wall time zeroed, for determinism comparisons.
    pub fn to_json_without_time(&self) -> String {
        let mut r = self.clone();
        r.wall_time_ms = 0.0;
        r.to_json()
    }
}

/// JSON schema of [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("report.schema.json");
