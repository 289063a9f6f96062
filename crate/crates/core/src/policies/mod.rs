//! Policy interface and the policies compared in the experiments.
//!
//! Every policy follows the same two-step protocol per round: [`Policy::select`]
//! sees the round's candidates and returns a [`PolicyDecision`];
//! [`Policy::update`] then receives the reward of the chosen candidate only.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::environments::GroundTruth;
use crate::error::{Error, Result};

mod baselines;
mod fair_greedy;
mod oracles;

pub use baselines::{Greedy, Oful, UniformRandom};
pub use fair_greedy::{FairGreedy, Pooling};
pub use oracles::{GmfOracle, OptimalOracle, OracleCdf, OracleRewards};

/// The candidates offered at round `t`.
///
/// `groups` is absent in fixed-group mode, where candidate `a` always belongs
/// to group `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundContexts {
    pub round: usize,
    pub contexts: Vec<Vec<f64>>,
    pub groups: Option<Vec<usize>>,
}

impl RoundContexts {
    pub fn new(round: usize, contexts: Vec<Vec<f64>>, groups: Option<Vec<usize>>) -> Result<Self> {
        if round == 0 {
            return Err(Error::contract("rounds are numbered from 1"));
        }
        let Some(first) = contexts.first() else {
            return Err(Error::contract("a round needs at least one candidate"));
        };
        let d = first.len();
        if d == 0 || contexts.iter().any(|x| x.len() != d) {
            return Err(Error::contract(
                "all candidates must share a positive dimension",
            ));
        }
        if let Some(g) = &groups {
            if g.len() != contexts.len() {
                return Err(Error::contract(format!(
                    "{} group labels for {} candidates",
                    g.len(),
                    contexts.len()
                )));
            }
        }
        Ok(Self {
            round,
            contexts,
            groups,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.contexts.len()
    }

    pub fn dim(&self) -> usize {
        self.contexts[0].len()
    }

    /// Group of candidate `arm`; the arm itself in fixed-group mode.
    pub fn group_of(&self, arm: usize) -> usize {
        self.groups.as_ref().map_or(arm, |g| g[arm])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    pub arm: usize,
    /// Decision score of every candidate (estimated rank, reward or index).
    pub scores: Vec<f64>,
    /// Estimated relative ranks, for rank-based policies only.
    pub rank_estimates: Option<Vec<f64>>,
    pub tie_set_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    FairGreedy,
    FairGreedyV2,
    Oful,
    Greedy,
    Uniform,
    OracleCdf,
    OracleRewards,
    GmfOracle,
    /// Picks the candidate of highest true reward.
    Optimal,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 9] = [
        PolicyKind::FairGreedy,
        PolicyKind::FairGreedyV2,
        PolicyKind::Oful,
        PolicyKind::Greedy,
        PolicyKind::Uniform,
        PolicyKind::OracleCdf,
        PolicyKind::OracleRewards,
        PolicyKind::GmfOracle,
        PolicyKind::Optimal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::FairGreedy => "fair_greedy",
            PolicyKind::FairGreedyV2 => "fair_greedy_v2",
            PolicyKind::Oful => "oful",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Uniform => "uniform",
            PolicyKind::OracleCdf => "oracle_cdf",
            PolicyKind::OracleRewards => "oracle_rewards",
            PolicyKind::GmfOracle => "gmf_oracle",
            PolicyKind::Optimal => "optimal",
        }
    }

    pub fn needs_ground_truth(self) -> bool {
        matches!(
            self,
            PolicyKind::OracleCdf
                | PolicyKind::OracleRewards
                | PolicyKind::GmfOracle
                | PolicyKind::Optimal
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_lambda() -> f64 {
    0.1
}

fn default_rho() -> f64 {
    1.0
}

fn default_oful_alpha() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_oful_alpha")]
    pub oful_alpha: f64,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            lambda: default_lambda(),
            rho: default_rho(),
            oful_alpha: default_oful_alpha(),
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_oful_alpha(mut self, alpha: f64) -> Self {
        self.oful_alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(format!(
                "{}: lambda must be positive, got {}",
                self.kind, self.lambda
            )));
        }
        crate::linmodel::check_rho(self.rho).map_err(|_| {
            Error::config(format!(
                "{}: rho must lie in (0, 1], got {}",
                self.kind, self.rho
            ))
        })?;
        if !(self.oful_alpha >= 0.0 && self.oful_alpha.is_finite()) {
            return Err(Error::config(format!(
                "{}: oful_alpha must be non-negative, got {}",
                self.kind, self.oful_alpha
            )));
        }
        Ok(())
    }
}

pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    fn select(&mut self, rc: &RoundContexts, rng: &mut dyn RngCore) -> Result<PolicyDecision>;

    /// Feeds back the reward of the candidate chosen in `decision`.
    fn update(&mut self, rc: &RoundContexts, decision: &PolicyDecision, reward: f64) -> Result<()>;
}

/// Instantiates a policy for `dim`-dimensional contexts.
///
/// Oracle policies require `truth`; passing `None` for them is a
/// configuration error.
pub fn build_policy(
    cfg: &PolicyConfig,
    dim: usize,
    truth: Option<Arc<GroundTruth>>,
) -> Result<Box<dyn Policy>> {
    cfg.validate()?;
    let need_truth = || {
        truth.clone().ok_or_else(|| {
            Error::config(format!(
                "{} needs access to the environment's ground truth",
                cfg.kind
            ))
        })
    };
    Ok(match cfg.kind {
        PolicyKind::FairGreedy => {
            Box::new(FairGreedy::new(dim, cfg.lambda, cfg.rho, Pooling::PerArm)?)
        }
        PolicyKind::FairGreedyV2 => Box::new(FairGreedy::new(
            dim,
            cfg.lambda,
            cfg.rho,
            Pooling::PerGroup,
        )?),
        PolicyKind::Oful => Box::new(Oful::new(dim, cfg.lambda, cfg.oful_alpha)?),
        PolicyKind::Greedy => Box::new(Greedy::new(dim, cfg.lambda)?),
        PolicyKind::Uniform => Box::new(UniformRandom),
        PolicyKind::OracleCdf => Box::new(OracleCdf::new(dim, cfg.lambda, need_truth()?)?),
        PolicyKind::OracleRewards => Box::new(OracleRewards::new(need_truth()?)),
        PolicyKind::GmfOracle => Box::new(GmfOracle::new(need_truth()?)),
        PolicyKind::Optimal => Box::new(OptimalOracle::new(need_truth()?)),
    })
}

/// Picks uniformly among the candidates whose score equals the maximum exactly.
///
/// Returns `(arm, tie_set_size)`. Randomness is consumed only on a real tie.
pub fn argmax_uniform(scores: &[f64], rng: &mut dyn RngCore) -> (usize, usize) {
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == best)
        .map(|(i, _)| i)
        .collect();
    match ties.len() {
        0 => (rng.random_range(0..scores.len()), scores.len()),
        1 => (ties[0], 1),
        n => (ties[rng.random_range(0..n)], n),
    }
}

pub(crate) fn check_dim(rc: &RoundContexts, dim: usize) -> Result<()> {
    if rc.dim() != dim {
        return Err(Error::contract(format!(
            "policy expects {dim}-dimensional contexts, got {}",
            rc.dim()
        )));
    }
    Ok(())
}

pub(crate) fn decide(
    scores: Vec<f64>,
    rank_estimates: Option<Vec<f64>>,
    rng: &mut dyn RngCore,
) -> PolicyDecision {
    let (arm, tie_set_size) = argmax_uniform(&scores, rng);
    PolicyDecision {
        arm,
        scores,
        rank_estimates,
        tie_set_size,
    }
}
