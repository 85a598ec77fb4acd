//! Serializable experiment configuration shared by every suite.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

fn default_n() -> usize {
    64
}
fn default_seed() -> u64 {
    1
}
fn default_kmax() -> usize {
    10
}
fn default_tol() -> f64 {
    1e-8
}
fn default_trials() -> usize {
    20
}
fn default_jobs() -> usize {
    1
}

/// Everything a suite run needs, as data. Unknown keys are rejected on
/// parse, and serialize -> parse -> serialize is idempotent (field order is
/// fixed and no map types are involved).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: String,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Grid sizes for convergence studies.
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Steady-state spec string, e.g. `eigenstate:k=1,l=1,A=1`.
    #[serde(default)]
    pub state: Option<String>,
    /// Initial condition for time-dependent runs (`random:kmax=6` allowed).
    #[serde(default)]
    pub init: Option<String>,
    /// Kernel function names for Darboux runs.
    #[serde(default)]
    pub f_name: Option<String>,
    #[serde(default)]
    pub p_name: Option<String>,
    /// Eigenfunction seed spec for transport runs.
    #[serde(default)]
    pub phi0: Option<String>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub eps_rel: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub tend: Option<f64>,
    #[serde(default)]
    pub snap_every: Option<usize>,
    #[serde(default)]
    pub a1: Option<[f64; 3]>,
    #[serde(default)]
    pub a2: Option<[f64; 3]>,
    /// `(re, im)` of the eigenvalue for transport monitors.
    #[serde(default)]
    pub lambda: Option<[f64; 2]>,
    /// Epsilons for the α-limit study.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Input family for convergence studies: `analytic` or `bandlimited`.
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            n: default_n(),
            sizes: Vec::new(),
            seed: default_seed(),
            kmax: default_kmax(),
            tol: default_tol(),
            trials: default_trials(),
            jobs: default_jobs(),
            state: None,
            init: None,
            f_name: None,
            p_name: None,
            phi0: None,
            c: None,
            eps_rel: None,
            dt: None,
            tend: None,
            snap_every: None,
            a1: None,
            a2: None,
            lambda: None,
            epsilons: Vec::new(),
            family: None,
            out: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_idempotent() {
        let mut cfg = ExperimentConfig::new("jacobi");
        cfg.n = 48;
        cfg.seed = 7;
        cfg.a1 = Some([1.0, 2.0, 3.0]);
        let once = serde_json::to_string(&cfg).unwrap();
        let parsed: ExperimentConfig = serde_json::from_str(&once).unwrap();
        let twice = serde_json::to_string(&parsed).unwrap();
        assert_eq!(once, twice);
        assert_eq!(cfg, parsed);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let json = r#"{"suite": "jacobi", "grid_size": 64}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(json).is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"suite": "bracket"}"#).unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.tol, 1e-8);
        assert_eq!(cfg.trials, 20);
    }
}
