//! Run configuration: flat JSON, typo-safe.

use crate::beam::{THETA_MAX, THETA_MIN};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything a convergence run needs. Unknown JSON keys are rejected so a
/// misspelled field fails loudly instead of silently using a default.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WaveConfig {
    /// incidence angle Θ in radians
    pub theta: f64,
    /// Gaussian envelope width σ
    pub sigma: f64,
    /// wavenumbers of the sweep, strictly increasing, at least three
    pub k_list: Vec<f64>,
    pub y_min: f64,
    pub y_max: f64,
    pub y_points: usize,
    /// absolute tolerance for oscillatory quadrature
    pub quad_tol: f64,
    /// tolerance driving the truncation-radius selection
    pub tail_tol: f64,
    /// seed for any randomized sampling (route spot checks)
    pub seed: u64,
    /// where report, tables and plot files go
    pub out_dir: PathBuf,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig {
            theta: std::f64::consts::FRAC_PI_3,
            sigma: 1.0,
            k_list: vec![100.0, 200.0, 400.0, 800.0, 1600.0],
            y_min: -8.0,
            y_max: 8.0,
            y_points: 801,
            quad_tol: 1e-8,
            tail_tol: 1e-6,
            seed: 7,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl WaveConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: WaveConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(THETA_MIN..=THETA_MAX).contains(&self.theta) {
            return Err(Error::Config(format!(
                "theta = {} outside the admissible interval [{THETA_MIN}, {THETA_MAX}]",
                self.theta
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma = {} must be positive", self.sigma)));
        }
        if self.k_list.len() < 3 {
            return Err(Error::Config(format!(
                "k_list needs at least 3 entries for a rate fit, got {}",
                self.k_list.len()
            )));
        }
        for w in self.k_list.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config(format!(
                    "k_list must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !(self.k_list[0] >= 1.0) {
            return Err(Error::Config("all wavenumbers must be >= 1".into()));
        }
        if !(self.y_max > self.y_min) || self.y_points < 2 {
            return Err(Error::Config(format!(
                "bad y grid: [{}, {}] with {} points",
                self.y_min, self.y_max, self.y_points
            )));
        }
        if !(self.quad_tol > 0.0) || !(self.tail_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn y_grid(&self) -> Vec<f64> {
        let n = self.y_points;
        (0..n)
            .map(|i| self.y_min + (self.y_max - self.y_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let cfg = WaveConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.y_grid().len(), 801);
        assert_eq!(cfg.y_grid()[0], -8.0);
        assert_eq!(*cfg.y_grid().last().unwrap(), 8.0);
    }

    #[test]
    fn json_round_trip() {
        let cfg = WaveConfig::default();
        let s = serde_json::to_string_pretty(&cfg).unwrap();
        let back = WaveConfig::from_json_str(&s).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_rejected() {
        let r = WaveConfig::from_json_str(r#"{"theta": 1.0, "sigmma": 2.0}"#);
        match r {
            Err(crate::Error::Config(msg)) => assert!(msg.contains("sigmma"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = WaveConfig::from_json_str(r#"{"sigma": 2.0}"#).unwrap();
        assert_eq!(cfg.sigma, 2.0);
        assert_eq!(cfg.k_list, WaveConfig::default().k_list);
    }

    #[test]
    fn bad_inputs_rejected() {
        let mut cfg = WaveConfig::default();
        cfg.k_list = vec![100.0, 100.0, 200.0];
        assert!(cfg.validate().is_err());
        let mut cfg = WaveConfig::default();
        cfg.k_list = vec![100.0, 200.0];
        assert!(cfg.validate().is_err());
        let mut cfg = WaveConfig::default();
        cfg.theta = 0.01;
        assert!(cfg.validate().is_err());
        let mut cfg = WaveConfig::default();
        cfg.quad_tol = 0.0;
        assert!(cfg.validate().is_err());
    }
}
