//! Fair-Greedy: greedy selection on estimated relative ranks.
//!
//! At round `t` with split point `t̃ = ⌊(t−1)/2⌋` the reward model is fitted on
//! the chosen pairs of rounds `1..=t̃` only, and the empirical CDFs are built
//! from all candidates of rounds `t̃+1..=t−1`. No sample feeds both.

use std::collections::VecDeque;

use rand::RngCore;

use super::{check_dim, decide, Policy, PolicyDecision, PolicyKind, RoundContexts};
use crate::ecdf::{split_point, EcdfWindow};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::linmodel::{check_rho, perturbed_estimate, RidgeState};

/// How candidates are compared against the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    /// One empirical CDF per arm (arms are the groups).
    PerArm,
    /// One empirical CDF per group label, pooling candidates of every arm.
    PerGroup,
}

#[derive(Debug, Clone)]
pub struct FairGreedy {
    pooling: Pooling,
    rho: f64,
    ridge: RidgeState,
    /// Chosen `(round, context, reward)` pairs not yet inside `1..=t̃`.
    pending: VecDeque<(usize, Vec<f64>, f64)>,
    window: EcdfWindow,
    last_round: usize,
}

impl FairGreedy {
    pub fn new(dim: usize, lambda: f64, rho: f64, pooling: Pooling) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self {
            pooling,
            rho,
            ridge: RidgeState::new(dim, lambda)?,
            pending: VecDeque::new(),
            window: EcdfWindow::new(),
            last_round: 0,
        })
    }

    pub fn pooling(&self) -> Pooling {
        self.pooling
    }

    pub fn ridge(&self) -> &RidgeState {
        &self.ridge
    }

    pub fn window(&self) -> &EcdfWindow {
        &self.window
    }

    /// Brings ridge and window to the state required at round `t`.
    fn advance_to(&mut self, t: usize) -> Result<usize> {
        let t_tilde = split_point(t);
        while self.pending.front().is_some_and(|p| p.0 <= t_tilde) {
            let (_, x, r) = self.pending.pop_front().expect("front checked");
            self.ridge.absorb(&x, r)?;
        }
        if self.ridge.count() != t_tilde {
            return Err(Error::contract(format!(
                "round {t}: ridge holds {} samples, expected {t_tilde}",
                self.ridge.count()
            )));
        }
        self.window.prune(t);
        Ok(t_tilde)
    }
}

impl Policy for FairGreedy {
    fn kind(&self) -> PolicyKind {
        match self.pooling {
            Pooling::PerArm => PolicyKind::FairGreedy,
            Pooling::PerGroup => PolicyKind::FairGreedyV2,
        }
    }

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision> {
        check_dim(rc, self.ridge.dim())?;
        if rc.round != self.last_round + 1 {
            return Err(Error::contract(format!(
                "expected round {}, got {}",
                self.last_round + 1,
                rc.round
            )));
        }
        let groups = match self.pooling {
            Pooling::PerGroup => Some(rc.groups.as_ref().ok_or_else(|| {
                Error::contract("pooled-by-group Fair-Greedy needs group labels")
            })?),
            Pooling::PerArm => None,
        };

        let t = rc.round;
        let t_tilde = self.advance_to(t)?;
        let estimate = perturbed_estimate(&self.ridge, t_tilde, self.rho, rng)?;
        let projected = self.window.project(&estimate.mu);
        let expected_samples = t - 1 - t_tilde;

        let mut ranks = Vec::with_capacity(rc.num_arms());
        for (arm, x) in rc.contexts.iter().enumerate() {
            let q = dot(&estimate.mu, x);
            let rank = match groups {
                None => {
                    let r = projected.rank_arm(arm, q);
                    if r.sample_count != expected_samples {
                        return Err(Error::contract(format!(
                            "round {t}: arm {arm} has {} window samples, expected {expected_samples}",
                            r.sample_count
                        )));
                    }
                    r
                }
                Some(g) => projected.rank_group(g[arm], q)?,
            };
            ranks.push(rank.value());
        }
        Ok(decide(ranks.clone(), Some(ranks), rng))
    }

    fn update(&mut self, rc: &RoundContexts, decision: &PolicyDecision, reward: f64) -> Result<()> {
        let x = rc
            .contexts
            .get(decision.arm)
            .ok_or_else(|| Error::contract(format!("arm {} out of range", decision.arm)))?;
        self.pending.push_back((rc.round, x.clone(), reward));
        self.window.push(rc.round, rc)?;
        self.last_round = rc.round;
        Ok(())
    }
}
