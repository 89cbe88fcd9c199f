//! Independent reference computations over the raw game tables.
//! Values come from plain value iteration, not the library's linear solves.
#![allow(dead_code)]

use stochgame::{GameSpec, Strategy};

/// Actions of each controller of `s` for joint index `j`, first controller most significant.
pub fn decode(g: &GameSpec, s: usize, mut j: usize) -> Vec<usize> {
    let ctl = &g.controllers[s];
    let mut out = vec![0; ctl.len()];
    for k in (0..ctl.len()).rev() {
        let m = g.actions[ctl[k]][s].len();
        out[k] = j % m;
        j /= m;
    }
    out
}

fn joint_total(g: &GameSpec, s: usize) -> usize {
    g.controllers[s].iter().map(|&i| g.actions[i][s].len()).product()
}

/// Probability of joint index j at s, with player `fix` (if any) forced to action `a`.
fn joint_prob(g: &GameSpec, pi: &Strategy, s: usize, j: usize, fix: Option<(usize, usize)>) -> f64 {
    let acts = decode(g, s, j);
    let mut p = 1.0;
    for (k, &i) in g.controllers[s].iter().enumerate() {
        p *= match fix {
            Some((fi, fa)) if fi == i => {
                if acts[k] == fa {
                    1.0
                } else {
                    0.0
                }
            }
            _ => pi.probs[i][s][acts[k]],
        };
    }
    p
}

/// Transition row and reward of player `i` at `s`, optionally with a forced action.
pub fn row(g: &GameSpec, pi: &Strategy, i: usize, s: usize, fix: Option<(usize, usize)>) -> (Vec<f64>, f64) {
    let ns = g.num_states();
    let mut p = vec![0.0; ns];
    let mut r = 0.0;
    for j in 0..joint_total(g, s) {
        let w = joint_prob(g, pi, s, j, fix);
        if w == 0.0 {
            continue;
        }
        for t in 0..ns {
            p[t] += w * g.transitions[s][j][t];
        }
        r += w * g.rewards[i][s][j];
    }
    (p, r)
}

pub fn gamma(g: &GameSpec) -> f64 {
    match g.discount {
        stochgame::DiscountMode::Discounted(x) => x,
        _ => panic!("discounted game expected"),
    }
}

fn iterate(gamma: f64, ns: usize, step: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let mut v = vec![0.0; ns];
    loop {
        let nv = step(&v);
        let d = nv.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = nv;
        if d * gamma / (1.0 - gamma) < 1e-14 {
            return v;
        }
    }
}

/// V_i^pi per state.
pub fn values(g: &GameSpec, pi: &Strategy, i: usize) -> Vec<f64> {
    let gm = gamma(g);
    let ns = g.num_states();
    let rows: Vec<(Vec<f64>, f64)> = (0..ns).map(|s| row(g, pi, i, s, None)).collect();
    iterate(gm, ns, |v| {
        rows.iter()
            .map(|(p, r)| r + gm * p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    })
}

/// Optimal values of player i against pi_{-i}.
pub fn br_values(g: &GameSpec, pi: &Strategy, i: usize) -> Vec<f64> {
    let gm = gamma(g);
    let ns = g.num_states();
    let opts: Vec<Vec<(Vec<f64>, f64)>> = (0..ns)
        .map(|s| {
            if g.controllers[s].contains(&i) {
                (0..g.actions[i][s].len()).map(|a| row(g, pi, i, s, Some((i, a)))).collect()
            } else {
                vec![row(g, pi, i, s, None)]
            }
        })
        .collect();
    iterate(gm, ns, |v| {
        opts.iter()
            .map(|o| {
                o.iter()
                    .map(|(p, r)| r + gm * p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    })
}

pub enum Weights {
    Uniform,
    Own,
    Dist(Vec<f64>),
}

pub fn weights(g: &GameSpec, w: &Weights, i: usize) -> Vec<f64> {
    let ns = g.num_states();
    match w {
        Weights::Uniform => vec![1.0 / ns as f64; ns],
        Weights::Dist(q) => q.clone(),
        Weights::Own => {
            let mut q = vec![0.0; ns];
            let own: Vec<usize> = (0..ns).filter(|&s| !g.actions[i][s].is_empty()).collect();
            assert_eq!(own.len(), 1, "player {i} must control exactly one state");
            q[own[0]] = 1.0;
            q
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn utility(g: &GameSpec, pi: &Strategy, i: usize, w: &Weights) -> f64 {
    dot(&weights(g, w, i), &values(g, pi, i))
}

/// Per-player gap u_i(BR) - u_i(pi).
pub fn gaps(g: &GameSpec, pi: &Strategy, w: &Weights) -> Vec<f64> {
    (0..g.n())
        .map(|i| {
            let q = weights(g, w, i);
            (dot(&q, &br_values(g, pi, i)) - dot(&q, &values(g, pi, i))).max(0.0)
        })
        .collect()
}

pub fn max_gap(g: &GameSpec, pi: &Strategy, w: &Weights) -> f64 {
    gaps(g, pi, w).into_iter().fold(0.0, f64::max)
}

/// Every pure strategy, odometer order over (player, state) slots.
pub fn all_pure(g: &GameSpec) -> Vec<Strategy> {
    let slots: Vec<(usize, usize)> = (0..g.n())
        .flat_map(|i| (0..g.num_states()).map(move |s| (i, s)))
        .filter(|&(i, s)| !g.actions[i][s].is_empty())
        .collect();
    let mut choice = vec![0usize; slots.len()];
    let mut out = Vec::new();
    loop {
        let mut probs: Vec<Vec<Vec<f64>>> =
            g.actions.iter().map(|row| row.iter().map(|a| vec![0.0; a.len()]).collect()).collect();
        for (k, &(i, s)) in slots.iter().enumerate() {
            probs[i][s][choice[k]] = 1.0;
        }
        out.push(Strategy { probs });
        let mut k = slots.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            let (i, s) = slots[k];
            choice[k] += 1;
            if choice[k] < g.actions[i][s].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

/// Pure strategies with gap at most `tol`.
pub fn pure_nash(g: &GameSpec, w: &Weights, tol: f64) -> Vec<Strategy> {
    all_pure(g).into_iter().filter(|pi| max_gap(g, pi, w) <= tol).collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum()).collect())
        .collect()
}

/// Two players, player k owns state k with actions stay/move; own-state reward `r` for either action.
pub fn g2(gamma: f64, r: f64) -> GameSpec {
    let mut b = stochgame::GameBuilder::named(
        vec!["p1".into(), "p2".into()],
        vec!["s1".into(), "s2".into()],
        stochgame::DiscountMode::Discounted(gamma),
    );
    for s in 0..2 {
        b.tb_move(s, s, "stay", s, &[(s, r)]);
        b.tb_move(s, s, "move", 1 - s, &[(s, r)]);
    }
    b.build()
}

/// One player, one state, self-loop actions with the given rewards.
pub fn bandit(gamma: f64, rewards: &[f64]) -> GameSpec {
    let mut b = stochgame::GameBuilder::new(1, 1, gamma);
    for (k, &r) in rewards.iter().enumerate() {
        b.tb_move(0, 0, &format!("a{}", k + 1), 0, &[(0, r)]);
    }
    b.build()
}

/// Pure strategy of an O-game from one action index per player.
pub fn pure(g: &GameSpec, acts: &[usize]) -> Strategy {
    Strategy::pure_own(g, acts)
}
