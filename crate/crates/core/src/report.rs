//! Machine-readable results of a convergence run.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One wavenumber of the sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KRecord {
    pub k: f64,
    /// max over the caustic-line y grid of |u_beam - u_exact|
    pub linf_error: f64,
    /// max over the same grid of |u_exact|, for the relative error
    pub max_abs_u: f64,
    /// linf_error / max_abs_u
    pub relative_error: f64,
    pub runtime_seconds: f64,
}

/// Outcome of one supporting property check (identities, envelopes,
/// quadrature self-consistency). `constant` carries whatever scalar the
/// check fits or measures, for trend inspection across runs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub constant: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceReport {
    pub records: Vec<KRecord>,
    /// slope of the least-squares line through (log k, log linf_error)
    pub fitted_rate: f64,
    pub fit_intercept: f64,
    /// full residual range of that fit, in decades
    pub fit_residual_spread: f64,
    /// slope of the fit through (log k, log relative_error)
    pub fitted_relative_rate: f64,
    pub checks: Vec<PropertyCheck>,
}

/// Acceptance window for the absolute-error rate (ideal: -5/6).
pub const RATE_RANGE: (f64, f64) = (-1.0, -0.68);
/// Acceptance window for the relative-error rate (ideal: -1).
pub const RELATIVE_RATE_RANGE: (f64, f64) = (-1.15, -0.85);

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("report parse: {e}")))
    }

    /// Names of the hard failures: rate outside its window, or any failed
    /// property check. Empty means the run is acceptable.
    pub fn hard_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(RATE_RANGE.0..=RATE_RANGE.1).contains(&self.fitted_rate) {
            out.push(format!(
                "fitted_rate {} outside [{}, {}]",
                self.fitted_rate, RATE_RANGE.0, RATE_RANGE.1
            ));
        }
        if !(RELATIVE_RATE_RANGE.0..=RELATIVE_RATE_RANGE.1).contains(&self.fitted_relative_rate) {
            out.push(format!(
                "fitted_relative_rate {} outside [{}, {}]",
                self.fitted_relative_rate, RELATIVE_RATE_RANGE.0, RELATIVE_RATE_RANGE.1
            ));
        }
        for c in &self.checks {
            if !c.passed {
                out.push(format!("check {} failed: {}", c.name, c.detail));
            }
        }
        out
    }
}
