//! Workload builders shared by the benchmarks.

use gmfair_core::policies::{build_policy, Policy, PolicyConfig, PolicyKind, RoundContexts};
use gmfair_core::rng::{derive_stream, StreamRng};
use gmfair_core::{EcdfWindow, Environment, SyntheticEnv, SyntheticSpec};
use rand::Rng;
use std::sync::Arc;

pub fn random_vectors(n: usize, d: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// A window holding `rounds` rounds of `k` candidates in `d` dimensions.
pub fn filled_window(rounds: usize, k: usize, d: usize, groups: usize) -> EcdfWindow {
    let mut rng = derive_stream(&["bench", "window"]);
    let mut w = EcdfWindow::new();
    for r in 1..=rounds {
        let xs = random_vectors(k, d, &mut rng);
        let gs = (0..k).map(|_| rng.random_range(0..groups)).collect();
        w.push(
            r,
            &RoundContexts::new(r, xs, Some(gs)).expect("valid round"),
        )
        .expect("increasing rounds");
    }
    w
}

/// A Fair-Greedy policy that has played `rounds` rounds of the four-group
/// synthetic problem, with the environment positioned at the next round.
pub fn warmed_fair_greedy(rounds: usize) -> (Box<dyn Policy>, Box<dyn Environment>, StreamRng) {
    let spec = Arc::new(SyntheticSpec::four_groups());
    let mut env: Box<dyn Environment> =
        Box::new(SyntheticEnv::new(spec.clone(), &["bench"]).expect("valid spec"));
    let mut policy = build_policy(
        &PolicyConfig::new(PolicyKind::FairGreedy),
        spec.ambient_dim(),
        None,
    )
    .expect("valid policy");
    let mut rng = derive_stream(&["bench", "policy"]);
    for t in 1..=rounds {
        let round = env.next_round(t);
        let d = policy.select(&round.contexts, &mut rng).expect("select");
        policy
            .update(&round.contexts, &d, round.reward(d.arm))
            .expect("update");
    }
    (policy, env, rng)
}
