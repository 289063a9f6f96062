//! Fair and standard pseudo-regret, selection statistics and distribution
//! diagnostics.

use serde::Serialize;

use crate::environments::{GroundTruth, Round};
use crate::error::{Error, Result};

/// `max(true_ranks) − true_ranks[chosen]`.
pub fn fair_instant_regret(true_ranks: &[f64], chosen: usize) -> f64 {
    let best = true_ranks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    best - true_ranks[chosen]
}

/// `max(true_rewards) − true_rewards[chosen]`.
pub fn standard_instant_regret(true_rewards: &[f64], chosen: usize) -> f64 {
    let best = true_rewards
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    best - true_rewards[chosen]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub chosen_arm: usize,
    pub chosen_group: usize,
    pub fair_inst_regret: f64,
    pub std_inst_regret: f64,
    pub chosen_rank: f64,
    pub best_rank: f64,
}

/// Everything recorded while one policy plays one seeded replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub policy: String,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub arm_selections: Vec<usize>,
    pub group_selections: Vec<usize>,
    pub group_received: Vec<usize>,
    /// Hex SHA-256 of the context stream the policy observed.
    pub context_digest: String,
}

impl RunTrace {
    pub fn new(policy: impl Into<String>, seed: u64, num_arms: usize, num_groups: usize) -> Self {
        Self {
            policy: policy.into(),
            seed,
            records: Vec::new(),
            arm_selections: vec![0; num_arms],
            group_selections: vec![0; num_groups],
            group_received: vec![0; num_groups],
            context_digest: String::new(),
        }
    }

    /// Scores the choice `chosen` against the round's ground truth.
    pub fn record(&mut self, round: &Round, truth: &GroundTruth, chosen: usize) {
        let rc = &round.contexts;
        let ranks = truth.true_ranks(rc);
        let best_rank = ranks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for a in 0..rc.num_arms() {
            self.group_received[rc.group_of(a)] += 1;
        }
        let chosen_group = rc.group_of(chosen);
        self.arm_selections[chosen] += 1;
        self.group_selections[chosen_group] += 1;
        self.records.push(RoundRecord {
            round: rc.round,
            chosen_arm: chosen,
            chosen_group,
            fair_inst_regret: fair_instant_regret(&ranks, chosen),
            std_inst_regret: standard_instant_regret(&round.true_rewards, chosen),
            chosen_rank: ranks[chosen],
            best_rank,
        });
    }

    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn cumulative_fair(&self) -> Vec<f64> {
        cumsum(self.records.iter().map(|r| r.fair_inst_regret))
    }

    pub fn cumulative_standard(&self) -> Vec<f64> {
        cumsum(self.records.iter().map(|r| r.std_inst_regret))
    }

    /// Selected / offered per group; `None` for a group never offered.
    pub fn group_fractions(&self) -> Vec<Option<f64>> {
        self.group_selections
            .iter()
            .zip(&self.group_received)
            .map(|(&s, &r)| (r > 0).then(|| s as f64 / r as f64))
            .collect()
    }

    pub fn arm_fractions(&self) -> Vec<f64> {
        let t = self.horizon().max(1) as f64;
        self.arm_selections.iter().map(|&c| c as f64 / t).collect()
    }
}

fn cumsum(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Mean and sample standard deviation (`n − 1` denominator; 0 for `n = 1`).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Per-round mean ± sd of cumulative regret across seeds, plus selection
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurves {
    pub num_traces: usize,
    pub fair_mean: Vec<f64>,
    pub fair_std: Vec<f64>,
    pub std_mean: Vec<f64>,
    pub std_std: Vec<f64>,
    pub group_fraction_mean: Vec<Option<f64>>,
    pub group_fraction_std: Vec<Option<f64>>,
    pub arm_fraction_mean: Vec<f64>,
    pub arm_fraction_std: Vec<f64>,
}

impl AggregateCurves {
    pub fn horizon(&self) -> usize {
        self.fair_mean.len()
    }
}

pub fn aggregate(traces: &[RunTrace]) -> Result<AggregateCurves> {
    let first = traces
        .first()
        .ok_or_else(|| Error::contract("cannot aggregate an empty list of traces"))?;
    let horizon = first.horizon();
    if traces.iter().any(|t| {
        t.horizon() != horizon
            || t.group_selections.len() != first.group_selections.len()
            || t.arm_selections.len() != first.arm_selections.len()
    }) {
        return Err(Error::contract("traces differ in horizon or shape"));
    }

    let fair: Vec<Vec<f64>> = traces.iter().map(RunTrace::cumulative_fair).collect();
    let std: Vec<Vec<f64>> = traces.iter().map(RunTrace::cumulative_standard).collect();
    let per_round = |curves: &[Vec<f64>]| -> (Vec<f64>, Vec<f64>) {
        (0..horizon)
            .map(|i| mean_std(&curves.iter().map(|c| c[i]).collect::<Vec<_>>()))
            .unzip()
    };
    let (fair_mean, fair_std) = per_round(&fair);
    let (std_mean, std_std) = per_round(&std);

    let group_fractions: Vec<Vec<Option<f64>>> =
        traces.iter().map(RunTrace::group_fractions).collect();
    let (group_fraction_mean, group_fraction_std) = (0..first.group_selections.len())
        .map(|g| {
            let vals: Vec<f64> = group_fractions.iter().filter_map(|f| f[g]).collect();
            if vals.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&vals);
                (Some(m), Some(s))
            }
        })
        .unzip();

    let arm_fractions: Vec<Vec<f64>> = traces.iter().map(RunTrace::arm_fractions).collect();
    let (arm_fraction_mean, arm_fraction_std) = (0..first.arm_selections.len())
        .map(|a| mean_std(&arm_fractions.iter().map(|f| f[a]).collect::<Vec<_>>()))
        .unzip();

    Ok(AggregateCurves {
        num_traces: traces.len(),
        fair_mean,
        fair_std,
        std_mean,
        std_std,
        group_fraction_mean,
        group_fraction_std,
        arm_fraction_mean,
        arm_fraction_std,
    })
}

/// DKWM radius: `P(sup |F̂ₙ − F| > ε) ≤ δ` for `ε = √(ln(2/δ) / 2n)`.
pub fn dkwm_epsilon(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Kolmogorov–Smirnov distance `sup |F̂ₙ − F|` between a sample and a
/// continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_distance_uniform(samples: &[f64]) -> f64 {
    ks_distance(samples, |x| x.clamp(0.0, 1.0))
}
