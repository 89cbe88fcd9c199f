//! Finite-horizon backward induction yielding a non-stationary equilibrium.

use std::time::Instant;

use crate::certify::nonstationary_certify;
use crate::error::{Result, SgError};
use crate::game::{GameSpec, NonStationaryStrategy, Strategy};

use super::{Diagnostics, SolveResult, SolvedStrategy};

/// H = ceil(1/(1-gamma) * ln(1/((1-gamma) eps))).
pub fn horizon(gamma: f64, eps: f64) -> usize {
    ((1.0 / (1.0 - gamma)) * (1.0 / ((1.0 - gamma) * eps)).ln()).ceil().max(1.0) as usize
}

pub fn backward_induction(g: &GameSpec, eps: f64) -> Result<SolveResult> {
    if !g.controllers.iter().all(|c| c.len() == 1) {
        return Err(SgError::NotTurnBased);
    }
    let gamma = g.gamma()?;
    let start = Instant::now();
    let h_max = horizon(gamma, eps);
    let n = g.n();
    let ns = g.num_states();
    let mut v = vec![vec![0.0; ns]; n];
    let mut per_step: Vec<Strategy> = Vec::with_capacity(h_max);
    for _ in 0..h_max {
        let mut next = vec![vec![0.0; ns]; n];
        let mut choice = vec![0usize; ns];
        for s in 0..ns {
            let owner = g.controllers[s][0];
            let q = |j: usize, a: usize| {
                g.rewards[j][s][a]
                    + gamma * g.transitions[s][a].iter().zip(&v[j]).map(|(p, x)| p * x).sum::<f64>()
            };
            let mut best = 0;
            let mut best_q = q(owner, 0);
            for a in 1..g.joint_count(s) {
                let qa = q(owner, a);
                if qa > best_q {
                    best = a;
                    best_q = qa;
                }
            }
            choice[s] = best;
            for (j, nj) in next.iter_mut().enumerate() {
                nj[s] = q(j, best);
            }
        }
        per_step.push(Strategy::pure_with(g, |_, s| choice[s]));
        v = next;
    }
    // the policy computed with h steps to go is played at time H - h + 1
    let tail = per_step.last().cloned().unwrap();
    per_step.reverse();
    let ns_strategy = NonStationaryStrategy { steps: per_step, tail };
    let certificate = nonstationary_certify(g, &ns_strategy, eps)?;
    Ok(SolveResult {
        strategy: SolvedStrategy::NonStationary(ns_strategy),
        certificate,
        iterations: h_max,
        wall_time: start.elapsed().as_secs_f64(),
        method: "bi",
        diagnostics: Diagnostics { horizon: Some(h_max), ..Default::default() },
    })
}
