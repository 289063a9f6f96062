//! Built-in experiment configurations.

use std::path::PathBuf;

use super::config::{
    DatasetEnvConfig, EnvironmentConfig, ExperimentConfig, PolicyEntry, SyntheticEnvConfig,
};
use crate::environments::{DatasetColumns, RewardNoise, SamplingMode, SyntheticSpec};
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyKind};

pub const PRESET_NAMES: [&str; 4] = [
    "synthetic-fig1",
    "census-gender",
    "census-ethnicity",
    "tradeoff-appF",
];

const CENSUS_REFERENCE: &str =
    concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/census_reference.csv");
const CENSUS_SAMPLING: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/census_sampling.csv");

fn entry(name: &str, kind: PolicyKind) -> PolicyEntry {
    PolicyEntry::new(name, PolicyConfig::new(kind))
}

fn census_features() -> Vec<String> {
    ["AGEP", "SCHL", "WKHP", "COW", "MAR"]
        .map(String::from)
        .to_vec()
}

fn census_env(columns: DatasetColumns, mode: SamplingMode, num_arms: usize) -> EnvironmentConfig {
    EnvironmentConfig::Dataset(DatasetEnvConfig {
        reference: Some(PathBuf::from(CENSUS_REFERENCE)),
        sampling: Some(PathBuf::from(CENSUS_SAMPLING)),
        columns: Some(columns),
        bundle: None,
        reward_noise: None,
        mode,
        num_arms,
        oracle_samples: 5_000,
    })
}

pub fn synthetic_fig1() -> ExperimentConfig {
    ExperimentConfig {
        name: "synthetic-fig1".into(),
        horizon: 10_000,
        num_seeds: 10,
        base_seed: 0,
        record_stride: 10,
        output_dir: None,
        environment: EnvironmentConfig::Synthetic(SyntheticEnvConfig::from_spec(
            SyntheticSpec::four_groups(),
            1_000_000,
        )),
        policies: vec![
            entry("fair_greedy", PolicyKind::FairGreedy),
            entry("oful", PolicyKind::Oful),
            entry("uniform", PolicyKind::Uniform),
        ],
    }
}

/// Two candidates per round, one per sex; observed rewards are recorded incomes.
pub fn census_gender() -> ExperimentConfig {
    let columns = DatasetColumns {
        feature_columns: census_features(),
        group_column: "SEX".into(),
        target_column: "PINCP".into(),
        min_group_size: 0,
        reward_noise: RewardNoise::RecordedTarget,
    };
    ExperimentConfig {
        name: "census-gender".into(),
        horizon: 5_000,
        num_seeds: 10,
        base_seed: 0,
        record_stride: 10,
        output_dir: None,
        environment: census_env(columns, SamplingMode::FixedGroupPerArm, 2),
        policies: vec![
            entry("fair_greedy", PolicyKind::FairGreedy),
            entry("oful", PolicyKind::Oful),
            entry("greedy", PolicyKind::Greedy),
            entry("uniform", PolicyKind::Uniform),
            entry("oracle_cdf", PolicyKind::OracleCdf),
            entry("oracle_rewards", PolicyKind::OracleRewards),
        ],
    }
}

/// Ten candidates drawn from the whole pool, grouped by race.
pub fn census_ethnicity() -> ExperimentConfig {
    let mut features = census_features();
    features.push("SEX".into());
    let columns = DatasetColumns {
        feature_columns: features,
        group_column: "RAC1P".into(),
        target_column: "PINCP".into(),
        min_group_size: 5_000,
        reward_noise: RewardNoise::Gaussian { sigma: 0.2 },
    };
    ExperimentConfig {
        name: "census-ethnicity".into(),
        horizon: 5_000,
        num_seeds: 10,
        base_seed: 0,
        record_stride: 10,
        output_dir: None,
        environment: census_env(columns, SamplingMode::IidPool, 10),
        policies: vec![
            entry("fair_greedy_v2", PolicyKind::FairGreedyV2),
            PolicyEntry::new(
                "oful",
                PolicyConfig::new(PolicyKind::Oful).with_oful_alpha(0.01),
            ),
            entry("greedy", PolicyKind::Greedy),
            entry("uniform", PolicyKind::Uniform),
            entry("oracle_cdf", PolicyKind::OracleCdf),
            entry("oracle_rewards", PolicyKind::OracleRewards),
        ],
    }
}

/// Two groups with disjoint reward supports.
pub fn tradeoff() -> ExperimentConfig {
    ExperimentConfig {
        name: "tradeoff-appF".into(),
        horizon: 5_000,
        num_seeds: 10,
        base_seed: 0,
        record_stride: 10,
        output_dir: None,
        environment: EnvironmentConfig::Synthetic(SyntheticEnvConfig::from_spec(
            SyntheticSpec::disjoint_pair(),
            1_000_000,
        )),
        policies: vec![
            entry("gmf_oracle", PolicyKind::GmfOracle),
            entry("optimal", PolicyKind::Optimal),
            entry("fair_greedy", PolicyKind::FairGreedy),
            entry("uniform", PolicyKind::Uniform),
        ],
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "synthetic-fig1" => Ok(synthetic_fig1()),
        "census-gender" => Ok(census_gender()),
        "census-ethnicity" => Ok(census_ethnicity()),
        "tradeoff-appF" => Ok(tradeoff()),
        other => Err(Error::config(format!(
            "unknown preset '{other}'; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}
