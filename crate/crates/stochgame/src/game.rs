//! Game model: states, per-player action sets, joint transitions and rewards.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, SgError};

/// Tolerance for probability simplex checks.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum DiscountMode {
    Discounted(f64),
    Absorbing,
    AverageReward,
}

/// An n-player stochastic game with dense tables.
///
/// Joint actions at a state are the cartesian product of the controllers'
/// action lists, taken in controller order with the first controller most
/// significant.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    pub players: Vec<String>,
    pub states: Vec<String>,
    /// Controllers of each state, in joint-action order.
    pub controllers: Vec<Vec<usize>>,
    /// `actions[i][s]` lists A_{i,s}; empty when i does not control s.
    pub actions: Vec<Vec<Vec<String>>>,
    /// `transitions[s][joint]` is a distribution over states.
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// `rewards[i][s][joint]`.
    pub rewards: Vec<Vec<Vec<f64>>>,
    pub discount: DiscountMode,
    pub absorbing_state: Option<usize>,
}

impl GameSpec {
    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn gamma(&self) -> Result<f64> {
        match self.discount {
            DiscountMode::Discounted(g) => Ok(g),
            _ => Err(SgError::WrongMode("expected a discounted game".into())),
        }
    }

    pub fn joint_count(&self, s: usize) -> usize {
        self.controllers[s]
            .iter()
            .map(|&i| self.actions[i][s].len())
            .product()
    }

    /// Per-controller action indices of joint action `j` at state `s`.
    pub fn decode_joint(&self, s: usize, mut j: usize) -> Vec<usize> {
        let ctrl = &self.controllers[s];
        let mut out = vec![0; ctrl.len()];
        for k in (0..ctrl.len()).rev() {
            let m = self.actions[ctrl[k]][s].len();
            out[k] = j % m;
            j /= m;
        }
        out
    }

    pub fn encode_joint(&self, s: usize, acts: &[usize]) -> usize {
        let ctrl = &self.controllers[s];
        let mut j = 0;
        for (k, &i) in ctrl.iter().enumerate() {
            j = j * self.actions[i][s].len() + acts[k];
        }
        j
    }

    /// States controlled by player i (S_i).
    pub fn controlled_states(&self, i: usize) -> Vec<usize> {
        (0..self.num_states())
            .filter(|&s| !self.actions[i][s].is_empty())
            .collect()
    }

    /// The single state of each player in an O-game.
    pub fn own_states(&self) -> Result<Vec<usize>> {
        (0..self.n())
            .map(|i| {
                let st = self.controlled_states(i);
                if st.len() == 1 {
                    Ok(st[0])
                } else {
                    Err(SgError::WrongClass(format!(
                        "player {} controls {} states",
                        self.players[i],
                        st.len()
                    )))
                }
            })
            .collect()
    }

    /// Number of actions of player i at its own states, maximised over states.
    pub fn max_actions(&self) -> usize {
        self.actions
            .iter()
            .flat_map(|row| row.iter().map(|a| a.len()))
            .max()
            .unwrap_or(0)
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|p| p == name)
    }

    /// Transition row and per-player rewards at `s` when controller `i` plays
    /// action `a` with probability `pol(i, a)`.
    pub fn state_mix(&self, s: usize, pol: &dyn Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
        let ns = self.num_states();
        let mut row = vec![0.0; ns];
        let mut r = vec![0.0; self.n()];
        let ctrl = &self.controllers[s];
        for j in 0..self.joint_count(s) {
            let acts = self.decode_joint(s, j);
            let mut w = 1.0;
            for (k, &i) in ctrl.iter().enumerate() {
                w *= pol(i, acts[k]);
                if w == 0.0 {
                    break;
                }
            }
            if w == 0.0 {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&self.transitions[s][j]) {
                *x += w * p;
            }
            for (i, ri) in r.iter_mut().enumerate() {
                *ri += w * self.rewards[i][s][j];
            }
        }
        (row, r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

pub fn validate_game(g: &GameSpec) -> ValidationReport {
    let mut v = Vec::new();
    let n = g.n();
    let ns = g.num_states();
    if n == 0 {
        v.push("game has no players".to_string());
    }
    if ns == 0 {
        v.push("game has no states".to_string());
    }
    if g.actions.len() != n || g.rewards.len() != n {
        v.push("per-player tables do not match player count".to_string());
        return ValidationReport { ok: false, violations: v };
    }
    if g.controllers.len() != ns || g.transitions.len() != ns {
        v.push("per-state tables do not match state count".to_string());
        return ValidationReport { ok: false, violations: v };
    }
    for i in 0..n {
        if g.actions[i].len() != ns || g.rewards[i].len() != ns {
            v.push(format!("player {}: tables do not cover all states", g.players[i]));
            return ValidationReport { ok: false, violations: v };
        }
    }
    for i in 0..n {
        if g.controlled_states(i).is_empty() {
            v.push(format!("player {} controls no state", g.players[i]));
        }
    }
    for s in 0..ns {
        let expect: Vec<usize> = (0..n).filter(|&i| !g.actions[i][s].is_empty()).collect();
        let mut got = g.controllers[s].clone();
        got.sort_unstable();
        if expect.is_empty() {
            v.push(format!("state {} has no controller", g.states[s]));
            continue;
        }
        if got != expect {
            v.push(format!("state {}: controller list disagrees with action sets", g.states[s]));
            continue;
        }
        let m = g.joint_count(s);
        if g.transitions[s].len() != m {
            v.push(format!("state {}: expected {} joint transitions", g.states[s], m));
            continue;
        }
        for (j, dist) in g.transitions[s].iter().enumerate() {
            if dist.len() != ns {
                v.push(format!("state {} joint {}: distribution has wrong length", g.states[s], j));
                continue;
            }
            let sum: f64 = dist.iter().sum();
            if dist.iter().any(|&p| p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > SIMPLEX_TOL {
                v.push(format!(
                    "transition not stochastic at state {} joint {} (sum {})",
                    g.states[s], j, sum
                ));
            }
        }
        for i in 0..n {
            if g.rewards[i][s].len() != m {
                v.push(format!("player {} state {}: reward table has wrong length", g.players[i], g.states[s]));
                continue;
            }
            for (j, &r) in g.rewards[i][s].iter().enumerate() {
                if !(r.abs() <= 1.0) {
                    v.push(format!(
                        "reward out of range: player {} state {} joint {} r = {}",
                        g.players[i], g.states[s], j, r
                    ));
                }
            }
        }
    }
    match g.discount {
        DiscountMode::Discounted(gm) if !(gm > 0.0 && gm < 1.0) => {
            v.push(format!("discount factor {} outside (0,1)", gm));
        }
        DiscountMode::Absorbing => match g.absorbing_state {
            None => v.push("absorbing mode requires an absorbing state".to_string()),
            Some(s) if s >= ns => v.push("absorbing state out of range".to_string()),
            _ => {}
        },
        _ => {}
    }
    ValidationReport { ok: v.is_empty(), violations: v }
}

fn ensure_valid(g: &GameSpec) -> Result<()> {
    let rep = validate_game(g);
    if rep.ok {
        Ok(())
    } else {
        Err(SgError::InvalidGame(rep.violations))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RewardSign {
    NonNegative,
    NonPositive,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameClass {
    pub is_tbsg: bool,
    pub is_ossg: bool,
    pub is_otbsg: bool,
    pub is_locreward: bool,
    pub reward_sign: RewardSign,
    pub deterministic_transitions: bool,
    pub action_independent_rewards: bool,
}

fn sign_of(values: impl Iterator<Item = f64>) -> RewardSign {
    let (mut pos, mut neg) = (false, false);
    for r in values {
        pos |= r > 0.0;
        neg |= r < 0.0;
    }
    match (pos, neg) {
        (_, false) => RewardSign::NonNegative,
        (false, true) => RewardSign::NonPositive,
        (true, true) => RewardSign::Mixed,
    }
}

pub fn classify_game(g: &GameSpec) -> Result<GameClass> {
    ensure_valid(g)?;
    let n = g.n();
    let ns = g.num_states();
    let is_tbsg = g.controllers.iter().all(|c| c.len() == 1);
    let is_ossg = (0..n).all(|i| g.controlled_states(i).len() == 1);
    let own = if is_ossg { g.own_states().ok() } else { None };
    let is_locreward = match &own {
        Some(own) => (0..n).all(|i| {
            (0..ns).all(|s| s == own[i] || g.rewards[i][s].iter().all(|&r| r == 0.0))
        }),
        None => false,
    };
    let reward_sign = if is_locreward {
        let own = own.as_ref().unwrap();
        sign_of((0..n).flat_map(|i| g.rewards[i][own[i]].iter().copied()))
    } else {
        sign_of(g.rewards.iter().flatten().flatten().copied())
    };
    let deterministic_transitions = g
        .transitions
        .iter()
        .flatten()
        .flatten()
        .all(|&p| p.abs() <= SIMPLEX_TOL || (p - 1.0).abs() <= SIMPLEX_TOL);
    let action_independent_rewards = g
        .rewards
        .iter()
        .flatten()
        .all(|row| row.iter().all(|&r| r == row[0]));
    Ok(GameClass {
        is_tbsg,
        is_ossg,
        is_otbsg: is_tbsg && is_ossg,
        is_locreward,
        reward_sign,
        deterministic_transitions,
        action_independent_rewards,
    })
}

/// Stationary strategy: `probs[i][s]` is a distribution over A_{i,s}.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl Strategy {
    pub fn uniform(g: &GameSpec) -> Self {
        let probs = g
            .actions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|a| vec![1.0 / a.len().max(1) as f64; a.len()])
                    .collect()
            })
            .collect();
        Strategy { probs }
    }

    /// Pure strategy with `choice(i, s)` selected at every controlled state.
    pub fn pure_with(g: &GameSpec, choice: impl Fn(usize, usize) -> usize) -> Self {
        let probs = (0..g.n())
            .map(|i| {
                (0..g.num_states())
                    .map(|s| {
                        let m = g.actions[i][s].len();
                        let mut v = vec![0.0; m];
                        if m > 0 {
                            v[choice(i, s)] = 1.0;
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Strategy { probs }
    }

    /// Pure strategy for an O-game: player i picks `acts[i]` at its own state.
    pub fn pure_own(g: &GameSpec, acts: &[usize]) -> Self {
        Strategy::pure_with(g, |i, _| acts[i])
    }

    pub fn set_pure(&mut self, i: usize, s: usize, a: usize) {
        let row = &mut self.probs[i][s];
        row.iter_mut().for_each(|x| *x = 0.0);
        row[a] = 1.0;
    }

    pub fn is_pure(&self) -> bool {
        self.probs
            .iter()
            .flatten()
            .all(|row| row.is_empty() || row.iter().any(|&p| (p - 1.0).abs() <= SIMPLEX_TOL))
    }

    /// Action chosen at (i, s) if the policy there is a point mass.
    pub fn pure_action(&self, i: usize, s: usize) -> Option<usize> {
        self.probs[i][s]
            .iter()
            .position(|&p| (p - 1.0).abs() <= SIMPLEX_TOL)
    }

    pub fn validate(&self, g: &GameSpec) -> Result<()> {
        if self.probs.len() != g.n() {
            return Err(SgError::DimensionMismatch("strategy player count".into()));
        }
        for i in 0..g.n() {
            if self.probs[i].len() != g.num_states() {
                return Err(SgError::DimensionMismatch(format!("strategy of player {}", g.players[i])));
            }
            for s in 0..g.num_states() {
                let row = &self.probs[i][s];
                if row.len() != g.actions[i][s].len() {
                    return Err(SgError::DimensionMismatch(format!(
                        "policy of player {} at state {}",
                        g.players[i], g.states[s]
                    )));
                }
                if row.is_empty() {
                    continue;
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > SIMPLEX_TOL {
                    return Err(SgError::DimensionMismatch(format!(
                        "policy of player {} at state {} is not a distribution",
                        g.players[i], g.states[s]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Max-norm distance between two strategies.
    pub fn dist_inf(&self, other: &Strategy) -> f64 {
        self.probs
            .iter()
            .flatten()
            .flatten()
            .zip(other.probs.iter().flatten().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Time-indexed strategy: `steps[h]` is played at time h+1, `tail` afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct NonStationaryStrategy {
    pub steps: Vec<Strategy>,
    pub tail: Strategy,
}

impl NonStationaryStrategy {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }
}

/// How per-state values are turned into a scalar utility.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialDistribution {
    Uniform,
    Dist(Vec<f64>),
    /// Point mass on each player's own state (O-games only).
    OwnState,
}

impl InitialDistribution {
    /// Weight vector over states for player i.
    pub fn weights(&self, g: &GameSpec, i: usize) -> Result<Vec<f64>> {
        let ns = g.num_states();
        match self {
            InitialDistribution::Uniform => Ok(vec![1.0 / ns as f64; ns]),
            InitialDistribution::Dist(q) => {
                if q.len() != ns {
                    return Err(SgError::DimensionMismatch("initial distribution length".into()));
                }
                Ok(q.clone())
            }
            InitialDistribution::OwnState => {
                let st = g.controlled_states(i);
                if st.len() != 1 {
                    return Err(SgError::WrongClass(
                        "own-state utilities need every player to control one state".into(),
                    ));
                }
                let mut q = vec![0.0; ns];
                q[st[0]] = 1.0;
                Ok(q)
            }
        }
    }
}

/// P^pi and the per-player reward vectors r_i^pi (rows of `r`).
#[derive(Clone, Debug)]
pub struct InducedChain {
    pub p: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

pub fn induced_chain(g: &GameSpec, pi: &Strategy) -> Result<InducedChain> {
    pi.validate(g)?;
    Ok(induced_chain_unchecked(g, pi))
}

pub(crate) fn induced_chain_unchecked(g: &GameSpec, pi: &Strategy) -> InducedChain {
    let ns = g.num_states();
    let mut p = DMatrix::zeros(ns, ns);
    let mut r = DMatrix::zeros(g.n(), ns);
    for s in 0..ns {
        let (row, rs) = g.state_mix(s, &|i, a| pi.probs[i][s][a]);
        for (t, x) in row.into_iter().enumerate() {
            p[(s, t)] = x;
        }
        for (i, x) in rs.into_iter().enumerate() {
            r[(i, s)] = x;
        }
    }
    InducedChain { p, r }
}

/// Replace player i's policy by the convex combination theta*alt + (1-theta)*base.
pub fn mix_strategy(
    g: &GameSpec,
    base: &Strategy,
    i: usize,
    alt: &[Vec<f64>],
    theta: f64,
) -> Result<Strategy> {
    if i >= g.n() {
        return Err(SgError::PlayerOutOfRange(i));
    }
    if alt.len() != g.num_states() {
        return Err(SgError::DimensionMismatch("alternative policy length".into()));
    }
    let mut out = base.clone();
    for s in 0..g.num_states() {
        if alt[s].len() != base.probs[i][s].len() {
            return Err(SgError::DimensionMismatch(format!("alternative policy at state {}", g.states[s])));
        }
        for (a, x) in out.probs[i][s].iter_mut().enumerate() {
            *x = (1.0 - theta) * base.probs[i][s][a] + theta * alt[s][a];
        }
    }
    Ok(out)
}

/// Incremental construction of a [`GameSpec`] by index.
#[derive(Clone, Debug)]
pub struct GameBuilder {
    players: Vec<String>,
    states: Vec<String>,
    actions: Vec<Vec<Vec<String>>>,
    transitions: HashMap<(usize, Vec<usize>), Vec<f64>>,
    rewards: HashMap<(usize, usize, Vec<usize>), f64>,
    discount: DiscountMode,
    absorbing_state: Option<usize>,
}

impl GameBuilder {
    /// Players are named "0".."n-1" and states "s0".."s{m-1}".
    pub fn new(players: usize, states: usize, gamma: f64) -> Self {
        Self::named(
            (0..players).map(|i| i.to_string()).collect(),
            (0..states).map(|s| format!("s{s}")).collect(),
            DiscountMode::Discounted(gamma),
        )
    }

    pub fn named(players: Vec<String>, states: Vec<String>, discount: DiscountMode) -> Self {
        let actions = vec![vec![Vec::new(); states.len()]; players.len()];
        GameBuilder {
            players,
            states,
            actions,
            transitions: HashMap::new(),
            rewards: HashMap::new(),
            discount,
            absorbing_state: None,
        }
    }

    pub fn absorbing_state(mut self, s: usize) -> Self {
        self.absorbing_state = Some(s);
        self
    }

    pub fn actions(&mut self, i: usize, s: usize, names: &[&str]) -> &mut Self {
        self.actions[i][s] = names.iter().map(|x| x.to_string()).collect();
        self
    }

    pub fn transition(&mut self, s: usize, joint: &[usize], dist: Vec<f64>) -> &mut Self {
        self.transitions.insert((s, joint.to_vec()), dist);
        self
    }

    pub fn reward(&mut self, i: usize, s: usize, joint: &[usize], r: f64) -> &mut Self {
        self.rewards.insert((i, s, joint.to_vec()), r);
        self
    }

    /// Append an action for the sole controller `i` of `s`, with its
    /// transition and the listed `(player, reward)` entries.
    pub fn tb_action(
        &mut self,
        s: usize,
        i: usize,
        name: &str,
        dist: Vec<f64>,
        rewards: &[(usize, f64)],
    ) -> &mut Self {
        self.actions[i][s].push(name.to_string());
        let a = self.actions[i][s].len() - 1;
        self.transitions.insert((s, vec![a]), dist);
        for &(j, r) in rewards {
            self.rewards.insert((j, s, vec![a]), r);
        }
        self
    }

    /// Deterministic variant of [`tb_action`](Self::tb_action).
    pub fn tb_move(&mut self, s: usize, i: usize, name: &str, to: usize, rewards: &[(usize, f64)]) -> &mut Self {
        let mut dist = vec![0.0; self.states.len()];
        dist[to] = 1.0;
        self.tb_action(s, i, name, dist, rewards)
    }

    pub fn build(&self) -> GameSpec {
        let n = self.players.len();
        let ns = self.states.len();
        let controllers: Vec<Vec<usize>> = (0..ns)
            .map(|s| (0..n).filter(|&i| !self.actions[i][s].is_empty()).collect())
            .collect();
        let mut g = GameSpec {
            players: self.players.clone(),
            states: self.states.clone(),
            controllers,
            actions: self.actions.clone(),
            transitions: Vec::new(),
            rewards: vec![Vec::new(); n],
            discount: self.discount.clone(),
            absorbing_state: self.absorbing_state,
        };
        for s in 0..ns {
            let m = g.joint_count(s);
            let rows = (0..m)
                .map(|j| {
                    let acts = g.decode_joint(s, j);
                    self.transitions
                        .get(&(s, acts))
                        .cloned()
                        .unwrap_or_else(|| vec![0.0; ns])
                })
                .collect();
            g.transitions.push(rows);
        }
        for i in 0..n {
            g.rewards[i] = (0..ns)
                .map(|s| {
                    (0..g.joint_count(s))
                        .map(|j| {
                            let acts = g.decode_joint(s, j);
                            *self.rewards.get(&(i, s, acts)).unwrap_or(&0.0)
                        })
                        .collect()
                })
                .collect();
        }
        g
    }
}
