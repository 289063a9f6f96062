//! Group meritocratic fair linear contextual bandits.
//!
//! A candidate's *relative rank* is the value of its own group's reward CDF at
//! its reward. A policy is group meritocratic fair when it always picks a
//! candidate of maximal relative rank; fair pseudo-regret measures how far a
//! learning policy falls short of that comparator.
//!
//! The crate is organised bottom-up:
//!
//! - [`linmodel`]: incremental ridge regression and the perturbed estimate
//!   used by Fair-Greedy.
//! - [`ecdf`]: the sliding window of past contexts and empirical CDF ranks.
//! - [`policies`]: Fair-Greedy (per-arm and pooled-by-group), OFUL, Greedy,
//!   Uniform and the oracle comparators.
//! - [`environments`]: the synthetic block-structured generator, the CSV
//!   dataset sampler and the true-rank oracle.
//! - [`metrics`]: fair and standard pseudo-regret, selection statistics,
//!   aggregation across seeds, DKWM and KS helpers.
//! - [`harness`]: configuration, presets, seeded replications and output files.

pub mod ecdf;
pub mod environments;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod linmodel;
pub mod metrics;
pub mod policies;
pub mod rng;

pub use ecdf::{EcdfWindow, ProjectedWindow, RankEstimate};
pub use environments::{
    build_rank_oracle, DatasetColumns, DatasetEnv, Environment, GroundTruth, GroupSampler,
    PreparedDataset, RewardNoise, Round, SamplingMode, SyntheticEnv, SyntheticSpec, TrueRankOracle,
};
pub use error::{Error, Result};
pub use harness::{
    emit_outputs, run_experiment, EnvironmentConfig, ExperimentConfig, PolicyEntry, ResultBundle,
};
pub use linmodel::{PerturbedEstimate, RidgeState};
pub use metrics::{AggregateCurves, RoundRecord, RunTrace};
pub use policies::{build_policy, Policy, PolicyConfig, PolicyDecision, PolicyKind, RoundContexts};
