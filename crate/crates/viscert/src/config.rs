//! Run configuration: a single JSON document drives every command.
//!
//! Unknown keys are rejected everywhere so that a typo in a config file
//! fails loudly instead of silently falling back to a default.

use crate::error::{Error, Result};
use crate::systems::{AccParams, QuadrotorParams, SyntheticParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Synthetic,
    Acc,
    Quadrotor,
}

impl std::fmt::Display for SystemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemId::Synthetic => write!(f, "synthetic"),
            SystemId::Acc => write!(f, "acc"),
            SystemId::Quadrotor => write!(f, "quadrotor"),
        }
    }
}

/// Optional overrides of the per-system candidate box.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSetConfig {
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

/// Nominal-density selection; `sigma` only applies to the truncated
/// Gaussian kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum NominalConfig {
    Uniform,
    TruncatedGaussian {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
}

fn default_sigma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    /// Lengthscale as a fraction of the domain width per dimension, unless
    /// `lengthscales` pins them explicitly.
    pub lengthscale_frac: f64,
    pub lengthscales: Option<Vec<f64>>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    /// Exploration probability of the gamma-greedy acquisition.
    pub gamma: f64,
    /// Straddle exploration weight.
    pub kappa: f64,
    /// Total labeled points (= oracle calls) for failure-set learning.
    pub budget: usize,
    pub pool_size: usize,
    pub seed_points: usize,
    pub grid_resolution: usize,
    /// Outward inflation of the fitted failure hull, in domain units.
    pub margin: f64,
    /// Optional marginal-likelihood grid search over lengthscale scalings.
    pub fit_lengthscales: bool,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            lengthscale_frac: 0.2,
            lengthscales: None,
            signal_variance: 1.0,
            noise_variance: 0.05,
            gamma: 0.1,
            kappa: 1.96,
            budget: 300,
            pool_size: 512,
            seed_points: 10,
            grid_resolution: 50,
            margin: 0.0,
            fit_lengthscales: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    /// Defensive-mixture weight on the surrogate.
    pub alpha: f64,
    /// Confidence parameter: the bound holds with probability 1 - beta.
    pub beta: f64,
    /// Sample size.
    pub n: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.05,
            n: 10_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Mixture weights compared in the study.
    pub alphas: Vec<f64>,
    /// Independent repetitions averaged per ladder point.
    pub repetitions: usize,
    /// Reference-truth sample multiplier (times the largest ladder count)
    /// for systems without an analytic failure probability.
    pub reference_multiplier: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.15, 0.35],
            repetitions: 1,
            reference_multiplier: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemId,
    #[serde(default)]
    pub synthetic: Option<SyntheticParams>,
    #[serde(default)]
    pub acc: Option<AccParams>,
    #[serde(default)]
    pub quadrotor: Option<QuadrotorParams>,
    #[serde(default)]
    pub candidate_set: CandidateSetConfig,
    #[serde(default)]
    pub nominal: Option<NominalConfig>,
    #[serde(default)]
    pub gp: GpConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_workers() -> usize {
    1
}

impl RunConfig {
    /// Minimal config for a system with every default in place.
    pub fn for_system(system: SystemId) -> Self {
        serde_json::from_value(serde_json::json!({ "system": system.to_string() }))
            .expect("default config is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let complain = |name: &'static str, value: f64, reason: &'static str| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.certify.alpha > 0.0 && self.certify.alpha < 1.0) {
            return complain(
                "certify.alpha",
                self.certify.alpha,
                "mixture weight must lie in (0,1)",
            );
        }
        if !(self.certify.beta > 0.0 && self.certify.beta < 1.0) {
            return complain(
                "certify.beta",
                self.certify.beta,
                "confidence parameter must lie in (0,1)",
            );
        }
        if self.certify.n < 2 {
            return complain("certify.n", self.certify.n as f64, "need at least 2 samples");
        }
        if !(0.0..=1.0).contains(&self.gp.gamma) {
            return complain("gp.gamma", self.gp.gamma, "gamma must lie in [0,1]");
        }
        if self.gp.kappa < 0.0 {
            return complain("gp.kappa", self.gp.kappa, "kappa must be nonnegative");
        }
        if self.gp.budget < 1 {
            return complain("gp.budget", self.gp.budget as f64, "budget must be >= 1");
        }
        if self.gp.pool_size < 1 {
            return complain("gp.pool_size", self.gp.pool_size as f64, "pool must be >= 1");
        }
        if self.gp.grid_resolution < 2 {
            return complain(
                "gp.grid_resolution",
                self.gp.grid_resolution as f64,
                "grid needs >= 2 points per axis",
            );
        }
        if self.gp.margin < 0.0 {
            return complain("gp.margin", self.gp.margin, "margin must be nonnegative");
        }
        if self.workers < 1 {
            return complain("workers", self.workers as f64, "need at least one worker");
        }
        for &a in &self.convergence.alphas {
            if !(a > 0.0 && a < 1.0) {
                return complain("convergence.alphas", a, "alphas must lie in (0,1)");
            }
        }
        if self.convergence.repetitions < 1 {
            return complain(
                "convergence.repetitions",
                self.convergence.repetitions as f64,
                "need at least one repetition",
            );
        }
        let wrong_params = match self.system {
            SystemId::Synthetic => self.acc.is_some() || self.quadrotor.is_some(),
            SystemId::Acc => self.synthetic.is_some() || self.quadrotor.is_some(),
            SystemId::Quadrotor => self.synthetic.is_some() || self.acc.is_some(),
        };
        if wrong_params {
            return Err(Error::Config(format!(
                "parameter section does not match system '{}'",
                self.system
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"system": "synthetic"}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.system, SystemId::Synthetic);
        assert_eq!(cfg.certify.n, 10_000);
        assert_eq!(cfg.gp.budget, 300);
        assert_eq!(cfg.workers, 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"system": "acc", "typo": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"system": "acc", "gp": {"bandwidth": 2}}"#
        )
        .is_err());
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"system": "acc", "acc": {"decel": 3.0, "extra": 1}}"#
        )
        .is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        let mut cfg = RunConfig::for_system(SystemId::Synthetic);
        cfg.certify.alpha = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::for_system(SystemId::Synthetic);
        cfg.certify.n = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::for_system(SystemId::Synthetic);
        cfg.gp.budget = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::for_system(SystemId::Synthetic);
        cfg.workers = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mismatched_param_section_is_rejected() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"system": "synthetic", "acc": {"decel": 2.0}}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }
}
