//! Strategy iteration for fixed-sign LocReward O-TBSGs.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::certify::certify_deviation;
use crate::error::{Result, SgError};
use crate::eval::utility;
use crate::game::{classify_game, induced_chain_unchecked, GameSpec, InitialDistribution, RewardSign, Strategy};

use super::{Diagnostics, SolveResult, SolvedStrategy};

fn pad(g: &GameSpec, sign: RewardSign, eps: f64) -> Result<GameSpec> {
    let gamma = g.gamma()?;
    let floor = (1.0 - gamma) * eps / 2.0;
    let own = g.own_states()?;
    let mut out = g.clone();
    for (i, &s) in own.iter().enumerate() {
        for r in out.rewards[i][s].iter_mut() {
            *r = match sign {
                RewardSign::NonPositive => r.min(-floor),
                _ => r.max(floor),
            };
        }
    }
    Ok(out)
}

/// Potential of a pure strategy; its change under a unilateral switch equals
/// the switching player's change in log |utility| (negated for non-positive rewards).
pub fn potential(g: &GameSpec, pi: &Strategy, sign: RewardSign) -> Result<f64> {
    let gamma = g.gamma()?;
    let own = g.own_states()?;
    let ch = induced_chain_unchecked(g, pi);
    let ns = g.num_states();
    let det = (DMatrix::<f64>::identity(ns, ns) - ch.p * gamma).determinant();
    let log_r: f64 = own.iter().enumerate().map(|(i, &s)| ch.r[(i, s)].abs().ln()).sum();
    let phi = log_r - det.ln();
    Ok(if sign == RewardSign::NonPositive { -phi } else { phi })
}

/// Upper bound on accepted switches: potential range over the minimum step.
pub fn iteration_bound(n: usize, gamma: f64, eps: f64) -> f64 {
    let range = n as f64 * (2.0 * (1.0 + gamma) / ((1.0 - gamma).powi(2) * eps)).ln();
    range / (1.0 + (1.0 - gamma) * eps / 2.0).ln()
}

pub fn strategy_iteration_locreward(g: &GameSpec, eps: f64) -> Result<SolveResult> {
    let class = classify_game(g)?;
    if !(class.is_otbsg && class.is_locreward) {
        return Err(SgError::WrongClass("strategy iteration needs a LocReward O-TBSG".into()));
    }
    if class.reward_sign == RewardSign::Mixed {
        return Err(SgError::WrongClass("strategy iteration needs rewards of one sign".into()));
    }
    let sign = class.reward_sign;
    let start = Instant::now();
    let padded = pad(g, sign, eps)?;
    let q = InitialDistribution::OwnState;
    let n = g.n();
    let own = g.own_states()?;
    let mut choice = vec![0usize; n];
    let mut pi = Strategy::pure_own(g, &choice);
    let mut trace = vec![potential(&padded, &pi, sign)?];
    let mut switches = 0;
    let mut sweeps = 0;
    'outer: loop {
        sweeps += 1;
        for i in 0..n {
            let cur = utility(&padded, &pi, i, &q)?;
            for a in 0..g.actions[i][own[i]].len() {
                if a == choice[i] {
                    continue;
                }
                let mut alt = pi.clone();
                alt.set_pure(i, own[i], a);
                if utility(&padded, &alt, i, &q)? >= cur + eps / 2.0 {
                    choice[i] = a;
                    pi = alt;
                    switches += 1;
                    trace.push(potential(&padded, &pi, sign)?);
                    continue 'outer;
                }
            }
        }
        break;
    }
    let certificate = certify_deviation(g, &pi, &q, eps)?;
    Ok(SolveResult {
        strategy: SolvedStrategy::Stationary(pi),
        certificate,
        iterations: switches,
        wall_time: start.elapsed().as_secs_f64(),
        method: "strategy-iter",
        diagnostics: Diagnostics { potential_trace: trace, sweeps: Some(sweeps), ..Default::default() },
    })
}
