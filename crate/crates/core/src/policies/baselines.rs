use rand::RngCore;

use super::{check_dim, decide, Policy, PolicyDecision, PolicyKind, RoundContexts};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::linmodel::RidgeState;

fn absorb_chosen(
    ridge: &mut RidgeState,
    rc: &RoundContexts,
    decision: &PolicyDecision,
    reward: f64,
) -> Result<()> {
    let x = rc
        .contexts
        .get(decision.arm)
        .ok_or_else(|| Error::contract(format!("arm {} out of range", decision.arm)))?;
    ridge.absorb(x, reward)
}

/// Selects the candidate with the highest estimated reward, fitting the
/// ridge model on every chosen pair so far.
#[derive(Debug, Clone)]
pub struct Greedy {
    ridge: RidgeState,
}

impl Greedy {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        Ok(Self {
            ridge: RidgeState::new(dim, lambda)?,
        })
    }
}

impl Policy for Greedy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Greedy
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.ridge.dim())?;
        let mu = self.ridge.estimate();
        let scores = rc.contexts.iter().map(|x| dot(&mu, x)).collect();
        Ok(decide(scores, None, rng))
    }

    fn update(&mut self, rc: &RoundContexts, decision: &PolicyDecision, reward: f64) -> Result<()> {
        absorb_chosen(&mut self.ridge, rc, decision, reward)
    }
}

/// Optimistic linear policy: estimated reward plus `alpha·‖x‖_{V⁻¹}`.
#[derive(Debug, Clone)]
pub struct Oful {
    ridge: RidgeState,
    alpha: f64,
}

impl Oful {
    pub fn new(dim: usize, lambda: f64, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::config(format!(
                "OFUL alpha must be non-negative, got {alpha}"
            )));
        }
        Ok(Self {
            ridge: RidgeState::new(dim, lambda)?,
            alpha,
        })
    }
}

impl Policy for Oful {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Oful
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.ridge.dim())?;
        let mu = self.ridge.estimate();
        let scores = rc
            .contexts
            .iter()
            .map(|x| dot(&mu, x) + self.alpha * self.ridge.mahalanobis_sq(x).sqrt())
            .collect();
        Ok(decide(scores, None, rng))
    }

    fn update(&mut self, rc: &RoundContexts, decision: &PolicyDecision, reward: f64) -> Result<()> {
        absorb_chosen(&mut self.ridge, rc, decision, reward)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UniformRandom;

impl Policy for UniformRandom {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Uniform
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        Ok(decide(vec![0.0; rc.num_arms()], None, rng))
    }

    fn update(&mut self, _: &RoundContexts, _: &PolicyDecision, _: f64) -> Result<()> {
        Ok(())
    }
}

/// Ridge estimate over all chosen pairs, shared by the full-history baselines.
pub(super) struct FullRidge(pub RidgeState);

impl FullRidge {
    pub fn absorb(
        &mut self,
        rc: &RoundContexts,
        decision: &PolicyDecision,
        reward: f64,
    ) -> Result<()> {
        absorb_chosen(&mut self.0, rc, decision, reward)
    }
}
