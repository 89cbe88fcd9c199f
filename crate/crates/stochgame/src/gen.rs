//! Seeded random instance generators used by tests, benches and the CLI.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::{DiscountMode, GameSpec, RewardSign, Strategy};

/// Random point of the probability simplex; sparse with probability 1/3.
pub fn random_dist<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let sparse = len > 1 && rng.random_bool(1.0 / 3.0);
    let mut v: Vec<f64> = (0..len)
        .map(|_| if sparse && rng.random_bool(0.5) { 0.0 } else { rng.random::<f64>() + 1e-3 })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.random_range(0..len)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn point_mass(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

/// Fill transitions and rewards for a game whose controllers and actions are set.
fn fill_tables<R: Rng>(rng: &mut R, g: &mut GameSpec, reward: &mut dyn FnMut(&mut R, usize, usize) -> f64) {
    let ns = g.num_states();
    g.transitions = (0..ns)
        .map(|s| (0..g.joint_count(s)).map(|_| random_dist(rng, ns)).collect())
        .collect();
    g.rewards = (0..g.n())
        .map(|i| {
            (0..ns)
                .map(|s| (0..g.joint_count(s)).map(|_| reward(rng, i, s)).collect())
                .collect()
        })
        .collect();
}

fn skeleton(n: usize, ns: usize, gamma: f64) -> GameSpec {
    GameSpec {
        players: (0..n).map(|i| i.to_string()).collect(),
        states: (0..ns).map(|s| format!("s{s}")).collect(),
        controllers: vec![Vec::new(); ns],
        actions: vec![vec![Vec::new(); ns]; n],
        transitions: Vec::new(),
        rewards: Vec::new(),
        discount: DiscountMode::Discounted(gamma),
        absorbing_state: None,
    }
}

fn set_actions<R: Rng>(rng: &mut R, g: &mut GameSpec, i: usize, s: usize, max_actions: usize) {
    let m = rng.random_range(1..=max_actions.max(1));
    g.actions[i][s] = (0..m).map(|a| format!("a{a}")).collect();
}

fn finish_controllers(g: &mut GameSpec) {
    for s in 0..g.num_states() {
        g.controllers[s] = (0..g.n()).filter(|&i| !g.actions[i][s].is_empty()).collect();
    }
}

fn uniform_reward<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..=1.0)
}

/// General simultaneous game: every state gets a random nonempty set of controllers.
pub fn random_simsg<R: Rng>(rng: &mut R, n: usize, ns: usize, max_actions: usize, gamma: f64) -> GameSpec {
    let mut g = skeleton(n, ns, gamma);
    for s in 0..ns {
        let mut ctrl: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
        if ctrl.is_empty() {
            ctrl.push(rng.random_range(0..n));
        }
        for i in ctrl {
            set_actions(rng, &mut g, i, s, max_actions);
        }
    }
    for i in 0..n {
        if g.controlled_states(i).is_empty() {
            let s = rng.random_range(0..ns);
            set_actions(rng, &mut g, i, s, max_actions);
        }
    }
    finish_controllers(&mut g);
    fill_tables(rng, &mut g, &mut |r, _, _| uniform_reward(r));
    g
}

/// Turn-based game with `ns >= n` states; player i owns state i plus random extras.
pub fn random_tbsg<R: Rng>(rng: &mut R, n: usize, ns: usize, max_actions: usize, gamma: f64) -> GameSpec {
    assert!(ns >= n);
    let mut g = skeleton(n, ns, gamma);
    for s in 0..ns {
        let i = if s < n { s } else { rng.random_range(0..n) };
        set_actions(rng, &mut g, i, s, max_actions);
    }
    finish_controllers(&mut g);
    fill_tables(rng, &mut g, &mut |r, _, _| uniform_reward(r));
    g
}

/// Each player controls exactly one state; states may be shared.
pub fn random_ossg<R: Rng>(rng: &mut R, n: usize, max_actions: usize, gamma: f64) -> GameSpec {
    let ns = rng.random_range(1..=n);
    let mut owner: Vec<usize> = (0..n).map(|i| if i < ns { i } else { rng.random_range(0..ns) }).collect();
    owner.shuffle(rng);
    let mut g = skeleton(n, ns, gamma);
    for (i, &s) in owner.iter().enumerate() {
        set_actions(rng, &mut g, i, s, max_actions);
    }
    finish_controllers(&mut g);
    fill_tables(rng, &mut g, &mut |r, _, _| uniform_reward(r));
    g
}

/// One player per state, player i at state i.
pub fn random_otbsg<R: Rng>(rng: &mut R, n: usize, max_actions: usize, gamma: f64) -> GameSpec {
    random_tbsg(rng, n, n, max_actions, gamma)
}

/// O-TBSG with rewards only at each player's own state, of the given sign.
pub fn random_locreward<R: Rng>(rng: &mut R, n: usize, max_actions: usize, gamma: f64, sign: RewardSign) -> GameSpec {
    let mut g = random_otbsg(rng, n, max_actions, gamma);
    for i in 0..n {
        for s in 0..n {
            for r in g.rewards[i][s].iter_mut() {
                *r = if s != i {
                    0.0
                } else {
                    let m: f64 = rng.random_range(0.0..=1.0);
                    match sign {
                        RewardSign::NonPositive => -m,
                        _ => m,
                    }
                };
            }
        }
    }
    g
}

/// Deterministic, action-independent LocReward O-TBSG on a random digraph.
pub fn random_graph_game<R: Rng>(rng: &mut R, nv: usize, max_out: usize, gamma: f64, sign: RewardSign) -> GameSpec {
    let mut g = skeleton(nv, nv, gamma);
    for v in 0..nv {
        let mut succ: Vec<usize> = (0..nv).collect();
        succ.shuffle(rng);
        succ.truncate(rng.random_range(1..=max_out.min(nv)));
        succ.sort_unstable();
        g.actions[v][v] = succ.iter().map(|t| format!("to{t}")).collect();
        g.transitions.push(succ.iter().map(|&t| point_mass(nv, t)).collect());
    }
    finish_controllers(&mut g);
    g.rewards = (0..nv)
        .map(|i| {
            let mag: f64 = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.05..=1.0) };
            let r = if sign == RewardSign::NonPositive { -mag } else { mag };
            (0..nv)
                .map(|s| vec![if s == i { r } else { 0.0 }; g.actions[s][s].len()])
                .collect()
        })
        .collect();
    g
}

/// Game in average-reward mode with strictly positive transitions (unichain).
pub fn random_unichain<R: Rng>(rng: &mut R, n: usize, ns: usize, max_actions: usize) -> GameSpec {
    let mut g = random_tbsg(rng, n, ns, max_actions, 0.5);
    for rows in g.transitions.iter_mut() {
        for d in rows.iter_mut() {
            let mut v: Vec<f64> = (0..ns).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            *d = v;
        }
    }
    g.discount = DiscountMode::AverageReward;
    g
}

pub fn random_strategy<R: Rng>(rng: &mut R, g: &GameSpec) -> Strategy {
    let probs = g
        .actions
        .iter()
        .map(|row| {
            row.iter()
                .map(|a| if a.is_empty() { Vec::new() } else { random_dist(rng, a.len()) })
                .collect()
        })
        .collect();
    Strategy { probs }
}

pub fn random_pure_strategy<R: Rng>(rng: &mut R, g: &GameSpec) -> Strategy {
    let choices: Vec<Vec<usize>> = g
        .actions
        .iter()
        .map(|row| row.iter().map(|a| if a.is_empty() { 0 } else { rng.random_range(0..a.len()) }).collect())
        .collect();
    Strategy::pure_with(g, |i, s| choices[i][s])
}
