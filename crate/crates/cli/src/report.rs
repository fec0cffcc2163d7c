use std::collections::BTreeMap;

use serde::Serialize;

use crate::suites::Check;

#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub params: ReportParams,
    pub checks: Vec<Check>,
    pub resolved: BTreeMap<String, String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(seed: u64, params: ReportParams, checks: Vec<Check>, resolved: BTreeMap<String, String>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self { seed, params, checks, resolved, pass }
    }
}
