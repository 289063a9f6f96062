//! Context/reward generators and the ground truth used by metrics and oracles.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::linalg::dot;
use crate::policies::RoundContexts;
use crate::rng::seeded;

mod dataset;
mod synthetic;

pub use dataset::{
    dataset_prepare, ColumnStats, DatasetColumns, DatasetEnv, PreparedDataset, RewardNoise,
    SamplingMode, Table,
};
pub use synthetic::{SyntheticEnv, SyntheticSpec};

/// One round drawn from an environment.
///
/// Rewards for every candidate are drawn up front so that the stream does not
/// depend on which candidate a policy picks.
#[derive(Debug, Clone)]
pub struct Round {
    pub contexts: RoundContexts,
    /// `⟨μ*, X_{t,a}⟩` for every candidate.
    pub true_rewards: Vec<f64>,
    /// What a policy observes if it picks the candidate.
    pub noisy_rewards: Vec<f64>,
}

impl Round {
    pub fn reward(&self, arm: usize) -> f64 {
        self.noisy_rewards[arm]
    }
}

/// A seeded stream of rounds.
pub trait Environment: Send {
    fn num_arms(&self) -> usize;

    fn next_round(&mut self, round: usize) -> Round;
}

/// Per-group context distribution with a known reward model.
pub trait GroupSampler: Sync {
    fn num_groups(&self) -> usize;

    fn dim(&self) -> usize;

    fn mu_star(&self) -> &[f64];

    fn group_names(&self) -> Vec<String>;

    fn sample_group_context(&self, group: usize, rng: &mut dyn RngCore) -> Vec<f64>;

    fn sample_group_reward(&self, group: usize, rng: &mut dyn RngCore) -> f64 {
        dot(self.mu_star(), &self.sample_group_context(group, rng))
    }
}

/// True relative-rank function of each group, approximated by a large sorted
/// sample of true rewards. Resolution is `1 / samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueRankOracle {
    per_group: Vec<Vec<f64>>,
}

impl TrueRankOracle {
    pub fn from_samples(mut per_group: Vec<Vec<f64>>) -> Self {
        per_group
            .iter_mut()
            .for_each(|v| v.sort_unstable_by(f64::total_cmp));
        Self { per_group }
    }

    pub fn num_groups(&self) -> usize {
        self.per_group.len()
    }

    pub fn samples(&self, group: usize) -> &[f64] {
        &self.per_group[group]
    }

    /// `#{samples ≤ value} / N` for the group.
    pub fn rank(&self, group: usize, value: f64) -> f64 {
        match self.per_group.get(group) {
            Some(s) if !s.is_empty() => s.partition_point(|&v| v <= value) as f64 / s.len() as f64,
            _ => 0.0,
        }
    }

    /// Worst per-group resolution `1 / min N`.
    pub fn resolution(&self) -> f64 {
        let n = self.per_group.iter().map(Vec::len).min().unwrap_or(0);
        if n == 0 {
            f64::INFINITY
        } else {
            1.0 / n as f64
        }
    }
}

/// Draws `samples_per_group` rewards per group and sorts them.
///
/// Each group gets its own child stream seeded from `rng`, so the result does
/// not depend on thread scheduling.
pub fn build_rank_oracle<S: GroupSampler + ?Sized>(
    sampler: &S,
    samples_per_group: usize,
    rng: &mut dyn RngCore,
) -> TrueRankOracle {
    let child_seeds: Vec<u64> = (0..sampler.num_groups()).map(|_| rng.random()).collect();
    let per_group = child_seeds
        .par_iter()
        .enumerate()
        .map(|(g, &seed)| {
            let mut child = seeded(seed);
            (0..samples_per_group)
                .map(|_| sampler.sample_group_reward(g, &mut child))
                .collect()
        })
        .collect();
    TrueRankOracle::from_samples(per_group)
}

/// What the metrics and the oracle policies may know: `μ*` and the true CDFs.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub mu_star: Vec<f64>,
    pub oracle: TrueRankOracle,
}

impl GroundTruth {
    pub fn true_rewards(&self, rc: &RoundContexts) -> Vec<f64> {
        rc.contexts.iter().map(|x| dot(&self.mu_star, x)).collect()
    }

    pub fn true_ranks(&self, rc: &RoundContexts) -> Vec<f64> {
        rc.contexts
            .iter()
            .enumerate()
            .map(|(a, x)| self.oracle.rank(rc.group_of(a), dot(&self.mu_star, x)))
            .collect()
    }
}
