use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{EnvironmentConfig, ExperimentConfig, PolicyEntry};
use crate::environments::{
    build_rank_oracle, dataset_prepare, DatasetEnv, Environment, GroundTruth, GroupSampler,
    PreparedDataset, SamplingMode, SyntheticEnv, SyntheticSpec, Table,
};
use crate::error::Result;
use crate::metrics::{aggregate, AggregateCurves, RunTrace};
use crate::policies::{build_policy, PolicyKind};
use crate::rng::derive_stream;

enum Source {
    Synthetic(Arc<SyntheticSpec>),
    Dataset {
        data: Arc<PreparedDataset>,
        mode: SamplingMode,
        num_arms: usize,
    },
}

impl Source {
    fn sampler(&self) -> &dyn GroupSampler {
        match self {
            Source::Synthetic(s) => s.as_ref(),
            Source::Dataset { data, .. } => data.as_ref(),
        }
    }

    fn num_arms(&self) -> usize {
        match self {
            Source::Synthetic(s) => s.num_arms,
            Source::Dataset { num_arms, .. } => *num_arms,
        }
    }

    fn environment(&self, labels: &[&str]) -> Result<Box<dyn Environment>> {
        Ok(match self {
            Source::Synthetic(s) => Box::new(SyntheticEnv::new(s.clone(), labels)?),
            Source::Dataset {
                data,
                mode,
                num_arms,
            } => Box::new(DatasetEnv::new(data.clone(), *mode, *num_arms, labels)?),
        })
    }
}

/// A validated experiment with its environment and ground truth built.
///
/// Every replication of every policy shares the ground truth; the round
/// stream of a replication depends on its seed only, so all policies see the
/// same candidates and the same reward draws.
pub struct Experiment {
    config: ExperimentConfig,
    source: Source,
    truth: Arc<GroundTruth>,
    group_names: Vec<String>,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let source = match &config.environment {
            EnvironmentConfig::Synthetic(c) => Source::Synthetic(Arc::new(c.spec())),
            EnvironmentConfig::Dataset(d) => {
                let mut data = match (&d.bundle, &d.reference, &d.sampling, &d.columns) {
                    (Some(bundle), ..) => PreparedDataset::load_bundle(bundle)?,
                    (None, Some(r), Some(s), Some(c)) => {
                        dataset_prepare(&Table::from_path(r)?, &Table::from_path(s)?, c)?
                    }
                    _ => unreachable!("validate() checks the dataset source"),
                };
                if let Some(noise) = d.reward_noise {
                    data.columns.reward_noise = noise;
                }
                Source::Dataset {
                    data: Arc::new(data),
                    mode: d.mode,
                    num_arms: d.num_arms,
                }
            }
        };
        // Fail on an unusable environment before any oracle work.
        source.environment(&["probe"])?;
        let sampler = source.sampler();
        let seed = config.base_seed.to_string();
        let oracle = build_rank_oracle(
            sampler,
            config.environment.oracle_samples(),
            &mut derive_stream(&["oracle", &seed]),
        );
        let truth = Arc::new(GroundTruth {
            mu_star: sampler.mu_star().to_vec(),
            oracle,
        });
        let group_names = sampler.group_names();
        Ok(Self {
            config,
            source,
            truth,
            group_names,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn truth(&self) -> &Arc<GroundTruth> {
        &self.truth
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn dim(&self) -> usize {
        self.source.sampler().dim()
    }

    pub fn num_arms(&self) -> usize {
        self.source.num_arms()
    }

    /// The round stream of replication `seed`.
    pub fn environment(&self, seed: u64) -> Result<Box<dyn Environment>> {
        let seed = seed.to_string();
        self.source.environment(&["seed", &seed])
    }

    /// Plays one policy for `horizon` rounds of replication `seed`.
    pub fn run_replication(&self, entry: &PolicyEntry, seed: u64) -> Result<RunTrace> {
        let truth = entry.kind.needs_ground_truth().then(|| self.truth.clone());
        let mut policy = build_policy(&entry.config(), self.dim(), truth)?;
        let mut env = self.environment(seed)?;
        let seed_label = seed.to_string();
        let mut rng = derive_stream(&["seed", &seed_label, "policy", &entry.name]);
        let mut trace = RunTrace::new(&entry.name, seed, self.num_arms(), self.group_names.len());
        let mut hasher = Sha256::new();
        for t in 1..=self.config.horizon {
            let round = env.next_round(t);
            for x in &round.contexts.contexts {
                for v in x {
                    hasher.update(v.to_le_bytes());
                }
            }
            if let Some(groups) = &round.contexts.groups {
                for &g in groups {
                    hasher.update((g as u64).to_le_bytes());
                }
            }
            let decision = policy.select(&round.contexts, &mut rng)?;
            trace.record(&round, &self.truth, decision.arm);
            policy.update(&round.contexts, &decision, round.reward(decision.arm))?;
        }
        trace.context_digest = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(trace)
    }

    /// Runs every (policy, seed) cell in parallel and aggregates per policy.
    pub fn run(&self) -> Result<ResultBundle> {
        let started = Instant::now();
        let seeds = self.config.seeds();
        let cells: Vec<(usize, u64)> = (0..self.config.policies.len())
            .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
            .collect();
        let traces = cells
            .par_iter()
            .map(|&(p, s)| self.run_replication(&self.config.policies[p], s))
            .collect::<Result<Vec<_>>>()?;

        let mut traces = traces.into_iter();
        let mut policies = Vec::with_capacity(self.config.policies.len());
        for entry in &self.config.policies {
            let own: Vec<RunTrace> = traces.by_ref().take(seeds.len()).collect();
            policies.push(PolicyResult {
                name: entry.name.clone(),
                kind: entry.kind,
                curves: aggregate(&own)?,
                traces: own,
            });
        }

        let manifest = Manifest {
            artifact: "gmfair-results".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: self.config.clone(),
            seeds: seeds.clone(),
            policies: self
                .config
                .policies
                .iter()
                .map(|p| p.name.clone())
                .collect(),
            group_names: self.group_names.clone(),
            dim: self.dim(),
            num_arms: self.num_arms(),
            mu_star: self.truth.mu_star.clone(),
            oracle_samples_per_group: self.config.environment.oracle_samples(),
            oracle_resolution: self.truth.oracle.resolution(),
            context_digests: policies
                .first()
                .map(|p| p.traces.iter().map(|t| t.context_digest.clone()).collect())
                .unwrap_or_default(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        };
        Ok(ResultBundle {
            group_names: self.group_names.clone(),
            policies,
            manifest,
        })
    }
}

/// Prepares and runs an experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultBundle> {
    Experiment::prepare(config.clone())?.run()
}

#[derive(Debug, Clone)]
pub struct PolicyResult {
    pub name: String,
    pub kind: PolicyKind,
    pub curves: AggregateCurves,
    /// One trace per seed, in seed order.
    pub traces: Vec<RunTrace>,
}

/// Run metadata written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub policies: Vec<String>,
    pub group_names: Vec<String>,
    pub dim: usize,
    pub num_arms: usize,
    pub mu_star: Vec<f64>,
    pub oracle_samples_per_group: usize,
    pub oracle_resolution: f64,
    /// Digest of each seed's context stream.
    pub context_digests: Vec<String>,
    /// Not written to `manifest.json`, which keeps output files a pure
    /// function of the config.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub group_names: Vec<String>,
    pub policies: Vec<PolicyResult>,
    pub manifest: Manifest,
}

impl ResultBundle {
    pub fn policy(&self, name: &str) -> Option<&PolicyResult> {
        self.policies.iter().find(|p| p.name == name)
    }
}
