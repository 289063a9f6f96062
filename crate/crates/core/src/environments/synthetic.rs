//! Block-structured synthetic groups.
//!
//! Candidate `a` (0-based) carries a uniform `[0,1]^m` latent vector in
//! coordinates `m·a .. m·a+m` and a group bias `bias_scale·(a+1)` in the last
//! coordinate; every other coordinate is zero. Reward distributions of
//! different groups therefore differ both in shape and in location.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{Environment, GroupSampler, Round};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::policies::RoundContexts;
use crate::rng::{derive_stream, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub num_arms: usize,
    #[serde(default = "default_latent_dim")]
    pub latent_dim: usize,
    pub mu_star: Vec<f64>,
    #[serde(default = "default_bias_scale")]
    pub bias_scale: f64,
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
}

fn default_latent_dim() -> usize {
    4
}

fn default_bias_scale() -> f64 {
    3.0
}

fn default_noise_sigma() -> f64 {
    2.0
}

impl SyntheticSpec {
    /// Four groups, `d = 17`, hand-picked group coefficients and unit bias weight.
    pub fn four_groups() -> Self {
        Self {
            num_arms: 4,
            latent_dim: 4,
            mu_star: vec![
                4.0, 3.0, 7.0, 0.0, //
                8.0, 0.0, 0.0, 0.0, //
                5.0, 5.0, 0.0, 0.0, //
                2.0, 2.0, 2.0, 2.0, //
                1.0,
            ],
            bias_scale: 3.0,
            noise_sigma: 2.0,
        }
    }

    /// Two groups whose rewards `3 + U` and `6 + U` have disjoint supports.
    pub fn disjoint_pair() -> Self {
        Self {
            num_arms: 2,
            latent_dim: 4,
            mu_star: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            bias_scale: 3.0,
            noise_sigma: 1.0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.latent_dim * self.num_arms + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_arms == 0 || self.latent_dim == 0 {
            return Err(Error::config(
                "synthetic environment needs num_arms ≥ 1 and latent_dim ≥ 1",
            ));
        }
        if self.mu_star.len() != self.ambient_dim() {
            return Err(Error::config(format!(
                "mu_star has length {}, expected latent_dim·num_arms + 1 = {}",
                self.mu_star.len(),
                self.ambient_dim()
            )));
        }
        if self.mu_star.iter().any(|v| !v.is_finite()) || !self.bias_scale.is_finite() {
            return Err(Error::config("mu_star and bias_scale must be finite"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// Upper bound on `‖X‖₂` over all groups.
    pub fn context_norm_bound(&self) -> f64 {
        let bias = self.bias_scale.abs() * self.num_arms as f64;
        (self.latent_dim as f64 + bias * bias).sqrt()
    }

    pub fn bias(&self, arm: usize) -> f64 {
        self.bias_scale * (arm + 1) as f64
    }
}

impl GroupSampler for SyntheticSpec {
    fn num_groups(&self) -> usize {
        self.num_arms
    }

    fn dim(&self) -> usize {
        self.ambient_dim()
    }

    fn mu_star(&self) -> &[f64] {
        &self.mu_star
    }

    fn group_names(&self) -> Vec<String> {
        (1..=self.num_arms).map(|a| format!("G{a}")).collect()
    }

    fn sample_group_context(&self, group: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        let d = self.ambient_dim();
        let m = self.latent_dim;
        let mut x = vec![0.0; d];
        for v in &mut x[m * group..m * (group + 1)] {
            *v = rng.random::<f64>();
        }
        x[d - 1] = self.bias(group);
        x
    }

    fn sample_group_reward(&self, group: usize, rng: &mut dyn RngCore) -> f64 {
        let m = self.latent_dim;
        let block = &self.mu_star[m * group..m * (group + 1)];
        let mut acc = 0.0;
        for w in block {
            acc += w * rng.random::<f64>();
        }
        acc + self.mu_star[self.ambient_dim() - 1] * self.bias(group)
    }
}

/// Seeded round stream; each arm's latent block comes from its own substream.
pub struct SyntheticEnv {
    spec: Arc<SyntheticSpec>,
    arm_rngs: Vec<StreamRng>,
    noise_rng: StreamRng,
}

impl SyntheticEnv {
    /// `labels` identify the replication (e.g. `["seed", "3"]`).
    pub fn new(spec: Arc<SyntheticSpec>, labels: &[&str]) -> Result<Self> {
        spec.validate()?;
        let arm_rngs = (0..spec.num_arms)
            .map(|a| {
                let a = a.to_string();
                let mut l = labels.to_vec();
                l.extend_from_slice(&["environment", "arm", &a]);
                derive_stream(&l)
            })
            .collect();
        let mut l = labels.to_vec();
        l.extend_from_slice(&["environment", "noise"]);
        Ok(Self {
            spec,
            arm_rngs,
            noise_rng: derive_stream(&l),
        })
    }

    pub fn spec(&self) -> &SyntheticSpec {
        &self.spec
    }
}

impl Environment for SyntheticEnv {
    fn num_arms(&self) -> usize {
        self.spec.num_arms
    }

    fn next_round(&mut self, round: usize) -> Round {
        let contexts: Vec<Vec<f64>> = self
            .arm_rngs
            .iter_mut()
            .enumerate()
            .map(|(a, rng)| self.spec.sample_group_context(a, rng))
            .collect();
        let true_rewards: Vec<f64> = contexts
            .iter()
            .map(|x| dot(&self.spec.mu_star, x))
            .collect();
        let sigma = self.spec.noise_sigma;
        let noisy_rewards = true_rewards
            .iter()
            .map(|r| {
                let xi: f64 = StandardNormal.sample(&mut self.noise_rng);
                r + sigma * xi
            })
            .collect();
        Round {
            contexts: RoundContexts::new(round, contexts, None).expect("well-formed round"),
            true_rewards,
            noisy_rewards,
        }
    }
}
