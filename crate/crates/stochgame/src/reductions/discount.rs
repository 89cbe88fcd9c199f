//! Discount-mode transforms: discounted to absorbing, average to discounted.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, SgError};
use crate::eval::stationary_distribution;
use crate::game::{DiscountMode, GameSpec, Strategy};

#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingMap {
    /// Index of the added trap state.
    pub trap: usize,
    /// Index of the added player owning the trap.
    pub trap_player: usize,
}

impl AbsorbingMap {
    /// Extend a strategy of the source game to the absorbing game.
    pub fn extend_strategy(&self, pi: &Strategy) -> Strategy {
        let mut probs: Vec<Vec<Vec<f64>>> = pi
            .probs
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.push(Vec::new());
                r
            })
            .collect();
        let mut own = vec![Vec::new(); self.trap + 1];
        own[self.trap] = vec![1.0];
        probs.push(own);
        Strategy { probs }
    }

    /// Extend a distribution over source states with zero mass on the trap.
    pub fn extend_dist(&self, q: &[f64]) -> Vec<f64> {
        let mut v = q.to_vec();
        v.push(0.0);
        v
    }
}

fn unique_name(existing: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while existing.contains(&name) {
        name.push('\'');
    }
    name
}

/// Rescale transitions by gamma/gamma' and send the remaining mass to a new
/// zero-reward trap state; with gamma' = 1 the result is an absorbing game.
pub fn discounted_to_absorbing(g: &GameSpec, gamma_prime: f64) -> Result<(GameSpec, AbsorbingMap)> {
    let gamma = g.gamma()?;
    if !(gamma_prime > gamma && gamma_prime <= 1.0) {
        return Err(SgError::BadDiscountPair { gamma, gamma_prime });
    }
    let n = g.n();
    let ns = g.num_states();
    let trap = ns;
    let ratio = gamma / gamma_prime;
    let mut states = g.states.clone();
    states.push(unique_name(&g.states, "s0"));
    let mut players = g.players.clone();
    players.push(unique_name(&g.players, "trap"));
    let mut actions: Vec<Vec<Vec<String>>> = g
        .actions
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(Vec::new());
            r
        })
        .collect();
    let mut trap_row = vec![Vec::new(); ns + 1];
    trap_row[trap] = vec!["stay".to_string()];
    actions.push(trap_row);
    let mut controllers = g.controllers.clone();
    controllers.push(vec![n]);
    let mut transitions: Vec<Vec<Vec<f64>>> = g
        .transitions
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|d| {
                    let mut v: Vec<f64> = d.iter().map(|p| ratio * p).collect();
                    v.push(1.0 - ratio);
                    v
                })
                .collect()
        })
        .collect();
    let mut stay = vec![0.0; ns + 1];
    stay[trap] = 1.0;
    transitions.push(vec![stay]);
    let mut rewards: Vec<Vec<Vec<f64>>> = g
        .rewards
        .iter()
        .map(|rows| {
            let mut r = rows.clone();
            r.push(vec![0.0]);
            r
        })
        .collect();
    rewards.push(
        (0..=ns)
            .map(|s| vec![0.0; if s == trap { 1 } else { g.joint_count(s) }])
            .collect(),
    );
    let (discount, absorbing_state) = if gamma_prime < 1.0 {
        (DiscountMode::Discounted(gamma_prime), None)
    } else {
        (DiscountMode::Absorbing, Some(trap))
    };
    let out = GameSpec { players, states, controllers, actions, transitions, rewards, discount, absorbing_state };
    Ok((out, AbsorbingMap { trap, trap_player: n }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageAdvice {
    pub gamma: f64,
    /// An equilibrium of the discounted game at this accuracy is an
    /// epsilon-equilibrium of the average-reward game.
    pub ne_tolerance: f64,
    pub epsilon: f64,
    pub t_mix: f64,
}

pub fn average_to_discounted(g: &GameSpec, t_mix: f64, eps: f64) -> Result<(GameSpec, AverageAdvice)> {
    if g.discount != DiscountMode::AverageReward {
        return Err(SgError::WrongMode("expected an average-reward game".into()));
    }
    if !(t_mix > 0.0 && eps > 0.0) {
        return Err(SgError::WrongMode("t_mix and epsilon must be positive".into()));
    }
    let gamma = 1.0 - eps / (9.0 * t_mix);
    if gamma <= 0.0 {
        return Err(SgError::WrongMode(format!("epsilon too large for t_mix: gamma = {gamma}")));
    }
    let mut out = g.clone();
    out.discount = DiscountMode::Discounted(gamma);
    let advice = AverageAdvice { gamma, ne_tolerance: eps / (3.0 * (1.0 - gamma)), epsilon: eps, t_mix };
    Ok((out, advice))
}

/// Smallest t with max_s ||P^t(s, .) - lambda||_1 <= 1/2, up to `cap`.
pub fn mixing_time(p: &DMatrix<f64>, cap: usize) -> Result<Option<usize>> {
    let lam = stationary_distribution(p)?;
    let ns = p.nrows();
    let mut pt = DMatrix::<f64>::identity(ns, ns);
    for t in 1..=cap {
        pt = &pt * p;
        let worst = (0..ns)
            .map(|s| (0..ns).map(|u| (pt[(s, u)] - lam[u]).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= 0.5 {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
