use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environments::{DatasetColumns, RewardNoise, SamplingMode, SyntheticSpec};
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyKind};

fn default_record_stride() -> usize {
    10
}

fn default_synthetic_oracle_samples() -> usize {
    1_000_000
}

fn default_dataset_oracle_samples() -> usize {
    5_000
}

fn default_lambda() -> f64 {
    PolicyConfig::new(PolicyKind::Uniform).lambda
}

fn default_rho() -> f64 {
    PolicyConfig::new(PolicyKind::Uniform).rho
}

fn default_oful_alpha() -> f64 {
    PolicyConfig::new(PolicyKind::Uniform).oful_alpha
}

/// A named policy within an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub name: String,
    pub kind: PolicyKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_oful_alpha")]
    pub oful_alpha: f64,
}

impl PolicyEntry {
    pub fn new(name: impl Into<String>, config: PolicyConfig) -> Self {
        Self {
            name: name.into(),
            kind: config.kind,
            lambda: config.lambda,
            rho: config.rho,
            oful_alpha: config.oful_alpha,
        }
    }

    pub fn config(&self) -> PolicyConfig {
        PolicyConfig {
            kind: self.kind,
            lambda: self.lambda,
            rho: self.rho,
            oful_alpha: self.oful_alpha,
        }
    }
}

fn default_latent_dim() -> usize {
    SyntheticSpec::four_groups().latent_dim
}

fn default_bias_scale() -> f64 {
    SyntheticSpec::four_groups().bias_scale
}

fn default_noise_sigma() -> f64 {
    SyntheticSpec::four_groups().noise_sigma
}

/// Block-structured synthetic groups; see [`SyntheticSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticEnvConfig {
    pub num_arms: usize,
    #[serde(default = "default_latent_dim")]
    pub latent_dim: usize,
    pub mu_star: Vec<f64>,
    #[serde(default = "default_bias_scale")]
    pub bias_scale: f64,
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    #[serde(default = "default_synthetic_oracle_samples")]
    pub oracle_samples: usize,
}

impl SyntheticEnvConfig {
    pub fn from_spec(spec: SyntheticSpec, oracle_samples: usize) -> Self {
        Self {
            num_arms: spec.num_arms,
            latent_dim: spec.latent_dim,
            mu_star: spec.mu_star,
            bias_scale: spec.bias_scale,
            noise_sigma: spec.noise_sigma,
            oracle_samples,
        }
    }

    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            num_arms: self.num_arms,
            latent_dim: self.latent_dim,
            mu_star: self.mu_star.clone(),
            bias_scale: self.bias_scale,
            noise_sigma: self.noise_sigma,
        }
    }
}

/// A dataset given either as raw CSV splits plus column roles, or as a
/// bundle written by `prepare-dataset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEnvConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<DatasetColumns>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<PathBuf>,
    /// Overrides the noise mode stored with the columns or the bundle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_noise: Option<RewardNoise>,
    pub mode: SamplingMode,
    pub num_arms: usize,
    #[serde(default = "default_dataset_oracle_samples")]
    pub oracle_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentConfig {
    Synthetic(SyntheticEnvConfig),
    Dataset(DatasetEnvConfig),
}

impl EnvironmentConfig {
    pub fn oracle_samples(&self) -> usize {
        match self {
            EnvironmentConfig::Synthetic(c) => c.oracle_samples,
            EnvironmentConfig::Dataset(c) => c.oracle_samples,
        }
    }

    /// Whether rounds carry group labels (candidates drawn from a pool).
    pub fn has_group_labels(&self) -> bool {
        matches!(self, EnvironmentConfig::Dataset(c) if c.mode == SamplingMode::IidPool)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub horizon: usize,
    pub num_seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub policies: Vec<PolicyEntry>,
}

fn valid_policy_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !name.starts_with('.')
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Parses a config file; relative dataset paths are resolved against the
    /// file's directory.
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let EnvironmentConfig::Dataset(d) = &mut cfg.environment {
            for p in [&mut d.reference, &mut d.sampling, &mut d.bundle]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment configs serialize to TOML")
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.num_seeds as u64)
            .map(|i| self.base_seed.wrapping_add(i))
            .collect()
    }

    /// Checks everything that can be checked without reading data files.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon must be at least 1"));
        }
        if self.num_seeds == 0 {
            return Err(Error::config("num_seeds must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(Error::config("record_stride must be at least 1"));
        }
        if self.environment.oracle_samples() == 0 {
            return Err(Error::config("oracle_samples must be at least 1"));
        }
        match &self.environment {
            EnvironmentConfig::Synthetic(c) => c.spec().validate()?,
            EnvironmentConfig::Dataset(d) => {
                if d.num_arms == 0 {
                    return Err(Error::config("num_arms must be at least 1"));
                }
                let raw = (
                    d.reference.is_some(),
                    d.sampling.is_some(),
                    d.columns.is_some(),
                );
                match (d.bundle.is_some(), raw) {
                    (true, (false, false, false)) | (false, (true, true, true)) => {}
                    _ => {
                        return Err(Error::config(
                            "dataset environment needs either `bundle` or all of `reference`, `sampling` and `columns`",
                        ))
                    }
                }
            }
        }
        let mut seen = HashSet::new();
        for p in &self.policies {
            if !valid_policy_name(&p.name) {
                return Err(Error::config(format!(
                    "policy name '{}' must use only ASCII letters, digits, '_', '-' or '.'",
                    p.name
                )));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::config(format!("duplicate policy name '{}'", p.name)));
            }
            p.config().validate()?;
            if p.kind == PolicyKind::FairGreedyV2 && !self.environment.has_group_labels() {
                return Err(Error::config(format!(
                    "policy '{}' pools by group and needs an iid_pool dataset environment",
                    p.name
                )));
            }
        }
        Ok(())
    }
}
