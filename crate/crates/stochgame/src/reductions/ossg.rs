//! Player-copy construction: one copy of each player per state.

use crate::error::Result;
use crate::eval::BellmanReport;
use crate::game::{GameSpec, Strategy};

/// Action name given to copies that have no real choice at their state.
pub const PLACEHOLDER: &str = "_";

#[derive(Clone, Debug, PartialEq)]
pub struct CopyMap {
    /// `copy[i][s]` is the copy-player of (i, s).
    pub copy: Vec<Vec<usize>>,
    /// Inverse map: copy-player to (i, s).
    pub origin: Vec<(usize, usize)>,
    /// True when A_{i,s} is empty and the copy holds a single placeholder action.
    pub placeholder: Vec<bool>,
}

impl CopyMap {
    pub fn strategy_to_copy(&self, g: &GameSpec, pi: &Strategy) -> Strategy {
        let ns = g.num_states();
        let probs = self
            .origin
            .iter()
            .enumerate()
            .map(|(k, &(i, s))| {
                (0..ns)
                    .map(|t| {
                        if t != s {
                            Vec::new()
                        } else if self.placeholder[k] {
                            vec![1.0]
                        } else {
                            pi.probs[i][s].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        Strategy { probs }
    }

    pub fn strategy_from_copy(&self, g: &GameSpec, pi: &Strategy) -> Strategy {
        let mut out = Strategy::uniform(g);
        for (k, &(i, s)) in self.origin.iter().enumerate() {
            if !self.placeholder[k] {
                out.probs[i][s] = pi.probs[k][s].clone();
            }
        }
        out
    }

    /// Copy-game Bellman report restricted to real players, relabelled to (i, s, a).
    pub fn report_from_copy(&self, rep: &BellmanReport) -> BellmanReport {
        let mut entries: Vec<_> = rep
            .entries
            .iter()
            .filter(|e| !self.placeholder[e.player])
            .map(|e| {
                let mut e = e.clone();
                e.player = self.origin[e.player].0;
                e
            })
            .collect();
        entries.sort_by_key(|e| (e.player, e.state, e.action));
        let max_upsilon = entries.iter().map(|e| e.upsilon).fold(0.0, f64::max);
        BellmanReport { entries, max_upsilon }
    }
}

/// n|S| players (i, s); player (i, s) acts only at s and is paid like i.
pub fn simsg_to_ossg(g: &GameSpec) -> Result<(GameSpec, CopyMap)> {
    g.gamma()?;
    let n = g.n();
    let ns = g.num_states();
    let mut copy = vec![vec![0; ns]; n];
    let mut origin = Vec::with_capacity(n * ns);
    let mut placeholder = Vec::with_capacity(n * ns);
    let mut players = Vec::with_capacity(n * ns);
    for i in 0..n {
        for s in 0..ns {
            copy[i][s] = origin.len();
            origin.push((i, s));
            placeholder.push(g.actions[i][s].is_empty());
            players.push(format!("{}@{}", g.players[i], g.states[s]));
        }
    }
    let mut actions = vec![vec![Vec::new(); ns]; n * ns];
    for (k, &(i, s)) in origin.iter().enumerate() {
        actions[k][s] = if placeholder[k] { vec![PLACEHOLDER.to_string()] } else { g.actions[i][s].clone() };
    }
    // real controllers keep their order; single-action placeholders go last
    // and leave the joint index unchanged
    let controllers = (0..ns)
        .map(|s| {
            let mut c: Vec<usize> = g.controllers[s].iter().map(|&i| copy[i][s]).collect();
            c.extend((0..n).filter(|&i| g.actions[i][s].is_empty()).map(|i| copy[i][s]));
            c
        })
        .collect();
    let rewards = origin.iter().map(|&(i, _)| g.rewards[i].clone()).collect();
    let out = GameSpec {
        players,
        states: g.states.clone(),
        controllers,
        actions,
        transitions: g.transitions.clone(),
        rewards,
        discount: g.discount.clone(),
        absorbing_state: g.absorbing_state,
    };
    Ok((out, CopyMap { copy, origin, placeholder }))
}
