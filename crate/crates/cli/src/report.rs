//! Suite reports: named residuals with per-residual tolerances, plus small
//! CSV writers for time series.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub linf: f64,
    pub l2: f64,
    pub mask_fraction: f64,
    /// Absent for purely informational entries, which never gate the verdict.
    pub tol: Option<f64>,
    pub pass: bool,
}

impl ResidualEntry {
    pub fn new(linf: f64, l2: f64, mask_fraction: f64, tol: f64) -> Self {
        Self {
            linf,
            l2,
            mask_fraction,
            tol: Some(tol),
            pass: linf < tol,
        }
    }

    pub fn scalar(value: f64, tol: f64) -> Self {
        Self::new(value, value, 1.0, tol)
    }

    pub fn info(value: f64) -> Self {
        Self {
            linf: value,
            l2: value,
            mask_fraction: 1.0,
            tol: None,
            pass: true,
        }
    }
}

/// One suite run: named residuals, verdict = AND over per-residual passes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub suite: String,
    pub timestamp: String,
    pub grid: Vec<usize>,
    pub parameters: ExperimentConfig,
    pub residuals: BTreeMap<String, ResidualEntry>,
    pub verdict: bool,
    pub runtime_ms: u64,
}

impl ResidualReport {
    pub fn new(config: &ExperimentConfig, grid: Vec<usize>) -> Self {
        Self {
            suite: config.suite.clone(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            grid,
            parameters: config.clone(),
            residuals: BTreeMap::new(),
            verdict: true,
            runtime_ms: 0,
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, entry: ResidualEntry) {
        self.verdict &= entry.pass;
        self.residuals.insert(name.into(), entry);
    }

    pub fn finish(mut self, started: Instant) -> Self {
        self.runtime_ms = started.elapsed().as_millis() as u64;
        self
    }

    pub fn max_linf(&self) -> f64 {
        self.residuals
            .values()
            .filter(|e| e.tol.is_some())
            .map(|e| e.linf)
            .fold(0.0, f64::max)
    }

    pub fn write_json(&self, path: &Path) -> anyhow::Result<()> {
        let file = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }
}

/// Write rows of `f64` columns under a header line.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_is_and_over_entries() {
        let cfg = ExperimentConfig::new("bracket");
        let mut r = ResidualReport::new(&cfg, vec![64, 64]);
        r.insert("a", ResidualEntry::scalar(1e-12, 1e-8));
        assert!(r.verdict);
        r.insert("info", ResidualEntry::info(42.0));
        assert!(r.verdict);
        r.insert("b", ResidualEntry::scalar(1e-3, 1e-8));
        assert!(!r.verdict);
    }

    #[test]
    fn json_roundtrip_preserves_residuals() {
        let cfg = ExperimentConfig::new("bracket");
        let mut r = ResidualReport::new(&cfg, vec![64, 64]);
        r.insert("x", ResidualEntry::new(1e-10, 5e-11, 0.97, 1e-8));
        let s = serde_json::to_string(&r).unwrap();
        let back: ResidualReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.residuals["x"], r.residuals["x"]);
    }
}
