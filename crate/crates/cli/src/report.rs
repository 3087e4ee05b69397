//! Run reports: per-case errors, timings, seeds and artifact paths.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use mlcs_core::solver::relative_error;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::formats;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub operator: String,
    pub variant: String,
    pub resolution: usize,
    pub trial: usize,
    pub seed: u64,
    pub measurements: usize,
    /// Relative error in percent against the original image.
    pub relative_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feasibility_gap: f64,
    pub seconds: f64,
    /// Raw `f64` reconstruction, relative to the output directory.
    pub reconstruction: Option<String>,
    pub display: Option<String>,
    pub mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: Experiment,
    pub config_digest: String,
    pub config: ExperimentConfig,
    pub root_seed: u64,
    pub cases: Vec<CaseReport>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub artifacts: Vec<String>,
    pub seconds: f64,
}

impl RunReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.experiment,
            config_digest: cfg.digest(),
            config: cfg.clone(),
            root_seed: cfg.seed,
            cases: Vec::new(),
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
            seconds: 0.0,
        }
    }

    /// Sorts the cases, stamps the wall time and writes `report.json`.
    pub fn finish(mut self, cfg: &ExperimentConfig, started: Instant) -> Result<Self> {
        self.cases.sort_by(|a, b| {
            (a.resolution, &a.operator, a.trial, &a.variant).cmp(&(b.resolution, &b.operator, b.trial, &b.variant))
        });
        self.seconds = started.elapsed().as_secs_f64();
        formats::write_json(&cfg.output_dir.join(REPORT_FILE), &self)?;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn cases_for<'a>(&'a self, operator: &'a str, variant: &'a str) -> impl Iterator<Item = &'a CaseReport> {
        self.cases.iter().filter(move |c| c.operator == operator && c.variant == variant)
    }

    pub fn operators(&self) -> Vec<String> {
        let mut ops: Vec<String> = self.cases.iter().map(|c| c.operator.clone()).collect();
        ops.sort();
        ops.dedup();
        ops
    }

    pub fn unconverged(&self) -> usize {
        self.cases.iter().filter(|c| !c.converged).count()
    }

    /// Recomputes every case error from the stored reconstruction and the
    /// stored original; returns the largest absolute discrepancy.
    pub fn verify_artifacts(&self, out_dir: &Path) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for case in &self.cases {
            let Some(raw) = &case.reconstruction else { continue };
            let side = case.resolution;
            let original = formats::load_raw(&out_dir.join(format!("original_{side}.f64")), side, side)?;
            let rec = formats::load_raw(&out_dir.join(raw), side, side)?;
            let err = relative_error(original.data(), rec.data())?;
            worst = worst.max((err - case.relative_error).abs());
        }
        Ok(worst)
    }
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
