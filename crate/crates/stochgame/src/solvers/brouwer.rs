//! Nash-style Brouwer maps on strategies and a damped fixed-point iteration.

use std::time::Instant;

use crate::certify::deviation_gap;
use crate::error::{Result, SgError};
use crate::eval::{bellman_errors, utility};
use crate::game::{GameSpec, InitialDistribution, Strategy};

use super::{Diagnostics, SolveResult, SolvedStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BrouwerMode {
    /// Gains in own-state utility from pure deviations (O-SSG only).
    ValueMap,
    /// Clipped one-step Bellman errors (any simultaneous game).
    BellmanMap,
}

impl BrouwerMode {
    fn utilities(self) -> InitialDistribution {
        match self {
            BrouwerMode::ValueMap => InitialDistribution::OwnState,
            BrouwerMode::BellmanMap => InitialDistribution::Uniform,
        }
    }
}

fn renorm(row: &[f64], ups: &[f64]) -> Vec<f64> {
    let tot: f64 = 1.0 + ups.iter().sum::<f64>();
    row.iter().zip(ups).map(|(p, u)| (p + u) / tot).collect()
}

pub fn brouwer_map(g: &GameSpec, pi: &Strategy, mode: BrouwerMode) -> Result<Strategy> {
    pi.validate(g)?;
    let mut out = pi.clone();
    match mode {
        BrouwerMode::ValueMap => {
            let own = g
                .own_states()
                .map_err(|_| SgError::WrongClass("value map needs every player to control one state".into()))?;
            let q = InitialDistribution::OwnState;
            for (i, &s) in own.iter().enumerate() {
                let base = utility(g, pi, i, &q)?;
                let mut ups = Vec::with_capacity(g.actions[i][s].len());
                for a in 0..g.actions[i][s].len() {
                    let mut dev = pi.clone();
                    dev.set_pure(i, s, a);
                    ups.push((utility(g, &dev, i, &q)? - base).max(0.0));
                }
                out.probs[i][s] = renorm(&pi.probs[i][s], &ups);
            }
        }
        BrouwerMode::BellmanMap => {
            let rep = bellman_errors(g, pi, None)?;
            for i in 0..g.n() {
                for s in g.controlled_states(i) {
                    out.probs[i][s] = renorm(&pi.probs[i][s], &rep.upsilon_at(i, s));
                }
            }
        }
    }
    Ok(out)
}

/// Lipschitz constant of the map in the sup norm.
pub fn lipschitz_bound(g: &GameSpec, mode: BrouwerMode) -> Result<f64> {
    let gamma = g.gamma()?;
    let a = g.max_actions() as f64;
    Ok(match mode {
        BrouwerMode::ValueMap => 1.0 + 4.0 * a * (a / (1.0 - gamma).powi(2)),
        BrouwerMode::BellmanMap => 1.0 + 4.0 * a * a / (1.0 - gamma).powi(2),
    })
}

/// Equilibrium accuracy implied by a fixed-point residual.
pub fn implied_epsilon(g: &GameSpec, mode: BrouwerMode, residual: f64) -> Result<f64> {
    let gamma = g.gamma()?;
    let a = g.max_actions() as f64;
    let rho = 1.0 / (1.0 - gamma);
    Ok(match mode {
        BrouwerMode::ValueMap => {
            let u = rho;
            (8.0 * rho * rho * a * a + rho * a * u) * (residual * (1.0 + a * u)).sqrt()
        }
        BrouwerMode::BellmanMap => 8.0 * a * a / (1.0 - gamma).powi(2) * (residual * a).sqrt(),
    })
}

/// Damped iteration pi <- (1-eta) pi + eta f(pi), keeping the best iterate.
pub fn brouwer_fixed_point_solve(
    g: &GameSpec,
    mode: BrouwerMode,
    eta: f64,
    max_iters: usize,
    target_residual: f64,
    init: Option<Strategy>,
) -> Result<SolveResult> {
    let start = Instant::now();
    let mut pi = init.unwrap_or_else(|| Strategy::uniform(g));
    let mut best = (f64::INFINITY, pi.clone());
    let mut iters = 0;
    let mut converged = false;
    loop {
        let y = brouwer_map(g, &pi, mode)?;
        let res = pi.dist_inf(&y);
        if res < best.0 {
            best = (res, pi.clone());
        }
        if res <= target_residual {
            converged = true;
            break;
        }
        if iters >= max_iters {
            break;
        }
        for (p, yv) in pi.probs.iter_mut().flatten().zip(y.probs.iter().flatten()) {
            for (x, t) in p.iter_mut().zip(yv) {
                *x = (1.0 - eta) * *x + eta * t;
            }
        }
        iters += 1;
    }
    let (residual, pi) = best;
    let certificate = deviation_gap(g, &pi, &mode.utilities())?;
    Ok(SolveResult {
        strategy: SolvedStrategy::Stationary(pi),
        certificate,
        iterations: iters,
        wall_time: start.elapsed().as_secs_f64(),
        method: match mode {
            BrouwerMode::ValueMap => "brouwer-value",
            BrouwerMode::BellmanMap => "brouwer-bellman",
        },
        diagnostics: Diagnostics {
            residual: Some(residual),
            implied_epsilon: Some(implied_epsilon(g, mode, residual)?),
            converged: Some(converged),
            ..Default::default()
        },
    })
}
