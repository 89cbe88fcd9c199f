//! Exact pure equilibria of deterministic, action-independent LocReward O-TBSGs
//! via shortest cycles (non-negative rewards) or longest cycles (non-positive).

use std::collections::VecDeque;
use std::time::Instant;

use crate::certify::certify_deviation;
use crate::error::{Result, SgError};
use crate::game::{classify_game, GameSpec, InitialDistribution, RewardSign, Strategy, SIMPLEX_TOL};

use super::{Diagnostics, SolveResult, SolvedStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleSign {
    NonNegative,
    NonPositive,
}

/// succ[v][a] for the graph on states; v is the state of player `owner[v]`.
struct Graph {
    succ: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

fn graph_of(g: &GameSpec) -> Graph {
    let ns = g.num_states();
    let owner: Vec<usize> = (0..ns).map(|s| g.controllers[s][0]).collect();
    let succ = (0..ns)
        .map(|s| {
            g.transitions[s]
                .iter()
                .map(|d| d.iter().position(|&p| (p - 1.0).abs() <= SIMPLEX_TOL).unwrap())
                .collect()
        })
        .collect();
    Graph { succ, owner }
}

/// Shortest cycle through `v` using only edges out of `alive` vertices:
/// the vertex sequence starting at v, or None.
fn shortest_cycle_from(gr: &Graph, alive: &[bool], v: usize) -> Option<Vec<usize>> {
    let n = gr.succ.len();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[v] = true;
    queue.push_back(v);
    while let Some(u) = queue.pop_front() {
        if !alive[u] {
            continue;
        }
        for &w in &gr.succ[u] {
            if w == v {
                let mut path = vec![u];
                let mut x = u;
                while x != v {
                    x = parent[x];
                    path.push(x);
                }
                path.reverse();
                return Some(path);
            }
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

fn shortest_cycles(gr: &Graph) -> (Vec<usize>, usize) {
    let n = gr.succ.len();
    let mut alive = vec![true; n];
    let mut choice = vec![usize::MAX; n];
    let mut rounds = 0;
    loop {
        let best = (0..n)
            .filter(|&v| alive[v])
            .filter_map(|v| shortest_cycle_from(gr, &alive, v))
            .min_by_key(|c| c.len());
        let Some(cycle) = best else { break };
        rounds += 1;
        for k in 0..cycle.len() {
            let (u, w) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            choice[u] = gr.succ[u].iter().position(|&x| x == w).unwrap();
            alive[u] = false;
        }
    }
    for c in choice.iter_mut() {
        if *c == usize::MAX {
            *c = 0;
        }
    }
    (choice, rounds)
}

/// Steps until the walk from v under `choice` first returns to v, if ever.
fn return_time(gr: &Graph, choice: &[usize], v: usize) -> Option<usize> {
    let mut x = gr.succ[v][choice[v]];
    for t in 1..=gr.succ.len() {
        if x == v {
            return Some(t);
        }
        x = gr.succ[x][choice[x]];
    }
    None
}

fn longest_cycles(gr: &Graph) -> Result<(Vec<usize>, usize)> {
    let n = gr.succ.len();
    let mut choice = vec![0usize; n];
    let edges: usize = gr.succ.iter().map(|s| s.len()).sum();
    let cap = 4 * n * n * edges + 100;
    let longer = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(x), Some(y)) => y > x,
    };
    for round in 0..cap {
        let mut switched = false;
        'scan: for v in 0..n {
            let cur = return_time(gr, &choice, v);
            for a in 0..gr.succ[v].len() {
                if a == choice[v] {
                    continue;
                }
                let old = choice[v];
                choice[v] = a;
                let alt = return_time(gr, &choice, v);
                if longer(cur, alt) {
                    switched = true;
                    break 'scan;
                }
                choice[v] = old;
            }
        }
        if !switched {
            return Ok((choice, round));
        }
    }
    Err(SgError::NonConvergent)
}

pub fn cycle_ne_graph(g: &GameSpec, sign: CycleSign) -> Result<SolveResult> {
    let class = classify_game(g)?;
    if !(class.is_otbsg && class.is_locreward && class.deterministic_transitions && class.action_independent_rewards) {
        return Err(SgError::WrongClass(
            "cycle solver needs a deterministic, action-independent LocReward O-TBSG".into(),
        ));
    }
    let own = g.own_states()?;
    let fits = own.iter().enumerate().all(|(i, &s)| {
        g.rewards[i][s].iter().all(|&r| match sign {
            CycleSign::NonNegative => r >= 0.0,
            CycleSign::NonPositive => r <= 0.0,
        })
    });
    if !fits {
        return Err(SgError::WrongClass("reward sign does not match the requested solver".into()));
    }
    let start = Instant::now();
    let gr = graph_of(g);
    let (choice, iterations) = match sign {
        CycleSign::NonNegative => shortest_cycles(&gr),
        CycleSign::NonPositive => longest_cycles(&gr)?,
    };
    let pi = Strategy::pure_with(g, |i, s| if gr.owner[s] == i { choice[s] } else { 0 });
    let certificate = certify_deviation(g, &pi, &InitialDistribution::OwnState, 0.0)?;
    Ok(SolveResult {
        strategy: SolvedStrategy::Stationary(pi),
        certificate,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        method: "cycle",
        diagnostics: Diagnostics::default(),
    })
}

impl From<RewardSign> for CycleSign {
    fn from(s: RewardSign) -> Self {
        match s {
            RewardSign::NonPositive => CycleSign::NonPositive,
            _ => CycleSign::NonNegative,
        }
    }
}
