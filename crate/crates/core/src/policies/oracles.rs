//! Comparator policies granted ground truth the learning policies never see.

use std::sync::Arc;

use rand::RngCore;

use super::baselines::FullRidge;
use super::{check_dim, decide, Policy, PolicyDecision, PolicyKind, RoundContexts};
use crate::ecdf::SortedSample;
use crate::environments::GroundTruth;
use crate::error::Result;
use crate::linalg::dot;
use crate::linmodel::RidgeState;

/// Fair-Greedy with the empirical CDFs replaced by the true ones and the
/// reward model fitted, unperturbed, on the full history.
pub struct OracleCdf {
    ridge: FullRidge,
    truth: Arc<GroundTruth>,
}

impl OracleCdf {
    pub fn new(dim: usize, lambda: f64, truth: Arc<GroundTruth>) -> Result<Self> {
        Ok(Self {
            ridge: FullRidge(RidgeState::new(dim, lambda)?),
            truth,
        })
    }
}

impl Policy for OracleCdf {
    fn kind(&self) -> PolicyKind {
        PolicyKind::OracleCdf
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.ridge.0.dim())?;
        let mu = self.ridge.0.estimate();
        let ranks: Vec<f64> = rc
            .contexts
            .iter()
            .enumerate()
            .map(|(a, x)| self.truth.oracle.rank(rc.group_of(a), dot(&mu, x)))
            .collect();
        Ok(decide(ranks.clone(), Some(ranks), rng))
    }

    fn update(&mut self, rc: &RoundContexts, decision: &PolicyDecision, reward: f64) -> Result<()> {
        self.ridge.absorb(rc, decision, reward)
    }
}

/// Fair-Greedy with the true reward model; the empirical CDFs use every
/// past candidate (no half-window split).
pub struct OracleRewards {
    truth: Arc<GroundTruth>,
    samples: Vec<SortedSample>,
}

impl OracleRewards {
    pub fn new(truth: Arc<GroundTruth>) -> Self {
        Self {
            truth,
            samples: Vec::new(),
        }
    }
}

impl Policy for OracleRewards {
    fn kind(&self) -> PolicyKind {
        PolicyKind::OracleRewards
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.truth.mu_star.len())?;
        let ranks: Vec<f64> = rc
            .contexts
            .iter()
            .enumerate()
            .map(|(a, x)| {
                let q = dot(&self.truth.mu_star, x);
                self.samples
                    .get(rc.group_of(a))
                    .map_or(0.0, |s| s.rank(q).value())
            })
            .collect();
        Ok(decide(ranks.clone(), Some(ranks), rng))
    }

    fn update(&mut self, rc: &RoundContexts, _: &PolicyDecision, _: f64) -> Result<()> {
        for (a, x) in rc.contexts.iter().enumerate() {
            let g = rc.group_of(a);
            if self.samples.len() <= g {
                self.samples.resize_with(g + 1, SortedSample::default);
            }
            self.samples[g].insert(dot(&self.truth.mu_star, x));
        }
        Ok(())
    }
}

/// The group meritocratic fair comparator: maximal true relative rank.
pub struct GmfOracle {
    truth: Arc<GroundTruth>,
}

impl GmfOracle {
    pub fn new(truth: Arc<GroundTruth>) -> Self {
        Self { truth }
    }
}

impl Policy for GmfOracle {
    fn kind(&self) -> PolicyKind {
        PolicyKind::GmfOracle
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.truth.mu_star.len())?;
        let ranks = self.truth.true_ranks(rc);
        Ok(decide(ranks.clone(), Some(ranks), rng))
    }

    fn update(&mut self, _: &RoundContexts, _: &PolicyDecision, _: f64) -> Result<()> {
        Ok(())
    }
}

/// Reward-maximizing comparator: highest true reward `⟨μ*, x⟩`.
pub struct OptimalOracle {
    truth: Arc<GroundTruth>,
}

impl OptimalOracle {
    pub fn new(truth: Arc<GroundTruth>) -> Self {
        Self { truth }
    }
}

impl Policy for OptimalOracle {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Optimal
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.truth.mu_star.len())?;
        Ok(decide(self.truth.true_rewards(rc), None, rng))
    }

    fn update(&mut self, _: &RoundContexts, _: &PolicyDecision, _: f64) -> Result<()> {
        Ok(())
    }
}
