//! Sliding window of past contexts and empirical-CDF rank estimates.
//!
//! Contexts are stored raw because the projection direction changes every
//! round. [`EcdfWindow::rank_per_arm`] and [`EcdfWindow::rank_per_group`] are
//! the direct O(n) definitions; [`ProjectedWindow`] projects the window once
//! per round and answers the same queries by binary search with bit-identical
//! results.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::policies::RoundContexts;

/// Split point `t̃ = ⌊(t−1)/2⌋` of round `t`.
#[inline]
pub fn split_point(t: usize) -> usize {
    t.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEntry {
    pub round: usize,
    pub arm: usize,
    pub group: Option<usize>,
    pub context: Vec<f64>,
}

/// Empirical CDF value `hits / sample_count`, defined as 0 on an empty sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankEstimate {
    pub hits: usize,
    pub sample_count: usize,
}

impl RankEstimate {
    pub fn value(&self) -> f64 {
        if self.sample_count == 0 {
            0.0
        } else {
            self.hits as f64 / self.sample_count as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EcdfWindow {
    entries: VecDeque<WindowEntry>,
    low_watermark: usize,
    last_round: Option<usize>,
}

impl EcdfWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest round index the window may still hold.
    pub fn low_watermark(&self) -> usize {
        self.low_watermark
    }

    pub fn last_round(&self) -> Option<usize> {
        self.last_round
    }

    pub fn entries(&self) -> impl Iterator<Item = &WindowEntry> {
        self.entries.iter()
    }

    /// Appends all candidates of a round, with their group labels when present.
    pub fn push(&mut self, round: usize, contexts: &RoundContexts) -> Result<()> {
        if let Some(last) = self.last_round {
            if round <= last {
                return Err(Error::contract(format!(
                    "window rounds must increase: got {round} after {last}"
                )));
            }
        }
        self.last_round = Some(round);
        for (arm, x) in contexts.contexts.iter().enumerate() {
            self.entries.push_back(WindowEntry {
                round,
                arm,
                group: contexts.groups.as_ref().map(|g| g[arm]),
                context: x.clone(),
            });
        }
        Ok(())
    }

    /// Keeps exactly the entries with round index in `[t̃+1, t−1]`.
    pub fn prune(&mut self, t: usize) {
        let low = split_point(t) + 1;
        while self.entries.front().is_some_and(|e| e.round < low) {
            self.entries.pop_front();
        }
        while self.entries.back().is_some_and(|e| e.round >= t) {
            self.entries.pop_back();
        }
        self.low_watermark = self.low_watermark.max(low);
    }

    pub fn count_for_arm(&self, arm: usize) -> usize {
        self.entries.iter().filter(|e| e.arm == arm).count()
    }

    pub fn count_for_group(&self, group: usize) -> usize {
        self.entries
            .iter()
            .filter(|e| e.group == Some(group))
            .count()
    }

    pub fn rank_per_arm(&self, mu: &[f64], arm: usize, query_context: &[f64]) -> RankEstimate {
        let q = dot(mu, query_context);
        let mut est = RankEstimate {
            hits: 0,
            sample_count: 0,
        };
        for e in self.entries.iter().filter(|e| e.arm == arm) {
            est.sample_count += 1;
            if dot(mu, &e.context) <= q {
                est.hits += 1;
            }
        }
        est
    }

    /// Pools the entries of `group` across all arms.
    pub fn rank_per_group(
        &self,
        mu: &[f64],
        group: usize,
        query_context: &[f64],
    ) -> Result<RankEstimate> {
        let q = dot(mu, query_context);
        let mut est = RankEstimate {
            hits: 0,
            sample_count: 0,
        };
        for e in &self.entries {
            match e.group {
                None => {
                    return Err(Error::contract(format!(
                        "window entry of round {} has no group label",
                        e.round
                    )))
                }
                Some(g) if g == group => {
                    est.sample_count += 1;
                    if dot(mu, &e.context) <= q {
                        est.hits += 1;
                    }
                }
                Some(_) => {}
            }
        }
        Ok(est)
    }

    /// Projects every retained entry onto `mu` and indexes the results.
    pub fn project(&self, mu: &[f64]) -> ProjectedWindow {
        let mut by_arm: Vec<Vec<f64>> = Vec::new();
        let mut by_group: Vec<Vec<f64>> = Vec::new();
        let mut unlabeled = false;
        for e in &self.entries {
            let p = dot(mu, &e.context);
            if by_arm.len() <= e.arm {
                by_arm.resize_with(e.arm + 1, Vec::new);
            }
            by_arm[e.arm].push(p);
            match e.group {
                Some(g) => {
                    if by_group.len() <= g {
                        by_group.resize_with(g + 1, Vec::new);
                    }
                    by_group[g].push(p);
                }
                None => unlabeled = true,
            }
        }
        ProjectedWindow {
            by_arm,
            by_group: (!unlabeled).then_some(by_group),
        }
    }
}

/// Projections of an [`EcdfWindow`] under a fixed direction, split by arm and
/// by group. Each query is a linear count; a round asks one query per arm, so
/// sorting would cost more than it saves.
#[derive(Debug, Clone)]
pub struct ProjectedWindow {
    by_arm: Vec<Vec<f64>>,
    by_group: Option<Vec<Vec<f64>>>,
}

fn count_le(samples: &[f64], q: f64) -> RankEstimate {
    RankEstimate {
        hits: samples.iter().filter(|&&v| v <= q).count(),
        sample_count: samples.len(),
    }
}

impl ProjectedWindow {
    /// Rank of an already projected query within `arm`'s samples.
    pub fn rank_arm(&self, arm: usize, query_projection: f64) -> RankEstimate {
        count_le(
            self.by_arm.get(arm).map_or(&[][..], Vec::as_slice),
            query_projection,
        )
    }

    pub fn rank_group(&self, group: usize, query_projection: f64) -> Result<RankEstimate> {
        let groups = self
            .by_group
            .as_ref()
            .ok_or_else(|| Error::contract("window entries carry no group labels"))?;
        Ok(count_le(
            groups.get(group).map_or(&[][..], Vec::as_slice),
            query_projection,
        ))
    }
}

/// Sorted, append-only sample of scalar values (projections under a fixed
/// direction) with the same `≤`-count semantics as the window.
#[derive(Debug, Clone, Default)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn insert(&mut self, v: f64) {
        let at = self.values.partition_point(|&x| x <= v);
        self.values.insert(at, v);
    }

    pub fn rank(&self, q: f64) -> RankEstimate {
        count_le(&self.values, q)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
