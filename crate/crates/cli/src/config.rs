//! Experiment configuration: JSON schema, validation, and seed derivation.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

/// The algebra the experiment runs on; omitted for generators that build
/// their own discretized interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraConfig {
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Generator selection with free-form parameters (validated per generator).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

pub const KNOWN_GENERATORS: &[&str] = &[
    "remark1",
    "remark2",
    "remark2_unbounded",
    "disjoint_supports",
    "orthogonal_plus_noise",
    "matrix_corner",
    "random_density",
];

pub const KNOWN_OPS: &[&str] = &["props", "l1const", "extract", "orthogonalize", "probe"];

/// A full experiment: algebra, generator, pipeline, seeds and budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub algebra: Option<AlgebraConfig>,
    #[serde(default)]
    pub generator: Option<GeneratorConfig>,
    pub pipeline: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Tag connecting this experiment to an acceptance criterion id, if any.
    #[serde(default)]
    pub criterion: Option<String>,
    /// Experiment name used as the artifact file prefix.
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_seed() -> u64 {
    0
}
fn default_depth() -> usize {
    6
}
fn default_trials() -> usize {
    100
}
fn default_tol() -> f64 {
    1e-9
}
fn default_eps() -> f64 {
    0.1
}
fn default_name() -> String {
    "experiment".into()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("config does not match the schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> anyhow::Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text)
    }

    /// Reject unknown generators and pipeline stages before any execution.
    pub fn validate(&self) -> anyhow::Result<()> {
        if let Some(g) = &self.generator {
            if !KNOWN_GENERATORS.contains(&g.name.as_str()) {
                bail!(
                    "unknown generator '{}'; known: {}",
                    g.name,
                    KNOWN_GENERATORS.join(", ")
                );
            }
        }
        if self.pipeline.is_empty() {
            bail!("pipeline is empty");
        }
        for op in &self.pipeline {
            if !KNOWN_OPS.contains(&op.as_str()) {
                bail!(
                    "unknown pipeline op '{op}'; known: {}",
                    KNOWN_OPS.join(", ")
                );
            }
        }
        if self.tol <= 0.0 {
            bail!("tol must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            bail!("eps must lie in (0,1)");
        }
        Ok(())
    }

    /// Per-trial seed derivation (splitmix-style stride keeps trials
    /// independent while the whole run stays a function of the master seed).
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed
            .wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}
