//! Directed graph to mixed-sign LocReward turn-based game whose pure
//! equilibria are exactly the Hamiltonian cycles of the graph.

use serde::Serialize;

use crate::error::{Result, SgError};
use crate::game::{DiscountMode, GameBuilder, GameSpec, Strategy};

pub const DEFAULT_GAMMA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectedGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = DirectedGraph { vertices, edges };
        g.validate()?;
        Ok(g)
    }

    /// Vertices "0".."n-1".
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), edges.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(SgError::InvalidGraph(format!("edge ({a}, {b}) has an unknown endpoint")));
            }
            if a == b {
                return Err(SgError::InvalidGraph(format!("self-loop at {}", self.vertices[a])));
            }
            if self.edges[..k].contains(&(a, b)) {
                return Err(SgError::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(())
    }

    /// Out-neighbours of `v` in increasing order.
    pub fn succ(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect();
        out.sort_unstable();
        out
    }

    /// True when the edge set is one directed cycle through every vertex.
    pub fn is_hamiltonian_cycle(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 || self.edges.len() != n {
            return false;
        }
        let mut next = vec![usize::MAX; n];
        for &(a, b) in &self.edges {
            if next[a] != usize::MAX {
                return false;
            }
            next[a] = b;
        }
        let mut v = 0;
        for step in 1..=n {
            v = next[v];
            if v == usize::MAX || (v == 0 && step < n) {
                return false;
            }
        }
        v == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HamiltonianMap {
    /// |V|.
    pub l: usize,
    pub long: Vec<usize>,
    pub short: Vec<usize>,
    /// Successors of each vertex, in the order of long-state actions.
    pub succ: Vec<Vec<usize>>,
}

impl HamiltonianMap {
    /// Action of long_i moving to short_j, for an edge (i, j).
    pub fn long_to_short(&self, i: usize, j: usize) -> Option<usize> {
        self.succ[i].iter().position(|&x| x == j)
    }
    pub fn long_to_own_short(&self, i: usize) -> usize {
        self.succ[i].len()
    }
    pub fn long_to_aux(&self, i: usize) -> usize {
        self.succ[i].len() + 1
    }
    /// Action of short_i entering the chain towards long_j (j != i).
    pub fn short_to_sl(&self, i: usize, j: usize) -> usize {
        assert_ne!(i, j);
        if j < i {
            j
        } else {
            j - 1
        }
    }
    pub fn short_to_long(&self) -> usize {
        self.l - 1
    }
    pub fn short_to_aux(&self) -> usize {
        self.l
    }

    /// long_i -> short_{next(i)}, short_i -> long_i along `cycle` (a vertex order).
    pub fn cycle_strategy(&self, g: &GameSpec, cycle: &[usize]) -> Result<Strategy> {
        let n = self.l;
        let mut seen = vec![false; n];
        for &v in cycle {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(SgError::InvalidGraph("cycle must list every vertex once".into()));
            }
        }
        if cycle.len() != n {
            return Err(SgError::InvalidGraph("cycle must list every vertex once".into()));
        }
        let mut pi = Strategy::pure_with(g, |_, _| 0);
        for k in 0..n {
            let (i, j) = (cycle[k], cycle[(k + 1) % n]);
            let a = self
                .long_to_short(i, j)
                .ok_or_else(|| SgError::InvalidGraph(format!("({i}, {j}) is not an edge")))?;
            pi.set_pure(self.long[i], self.long[i], a);
            pi.set_pure(self.short[i], self.short[i], self.short_to_long());
        }
        Ok(pi)
    }
}

/// Half the largest pure-NE tolerance for which the equivalence holds.
pub fn hamiltonian_delta(gamma: f64, l: usize) -> f64 {
    let a = gamma.powi(2 * l as i32 + 2);
    let b = gamma.powi(2 * l as i32 + 3);
    a * (1.0 - gamma) / ((1.0 - a) * (1.0 - b)) / 2.0
}

pub fn hamiltonian_game_build(graph: &DirectedGraph, gamma: f64) -> Result<(GameSpec, HamiltonianMap)> {
    graph.validate()?;
    let n = graph.vertices.len();
    if n < 2 {
        return Err(SgError::GraphTooSmall);
    }
    let l = n;
    let name = &graph.vertices;
    let mut states = Vec::new();
    let mut long = Vec::with_capacity(n);
    let mut short = Vec::with_capacity(n);
    let mut aux_short = Vec::with_capacity(n);
    let mut aux_long = Vec::with_capacity(n);
    let mut sl = vec![vec![Vec::new(); n]; n];
    let mut push = |s: String| {
        states.push(s);
        states.len() - 1
    };
    for i in 0..n {
        long.push(push(format!("long:{}", name[i])));
        short.push(push(format!("short:{}", name[i])));
        aux_short.push((1..=2 * l + 1).map(|k| push(format!("auxshort:{}:{k}", name[i]))).collect::<Vec<_>>());
        aux_long.push((1..=2 * l - 2).map(|k| push(format!("auxlong:{}:{k}", name[i]))).collect::<Vec<_>>());
        for j in (0..n).filter(|&j| j != i) {
            sl[i][j] = (1..=2 * l - 1).map(|k| push(format!("sl:{}:{}:{k}", name[i], name[j]))).collect();
        }
    }
    let mut b = GameBuilder::named(states.clone(), states.clone(), DiscountMode::Discounted(gamma));
    let ns = states.len();
    let mv = |b: &mut GameBuilder, s: usize, to: usize, r: f64| {
        let rw = if r != 0.0 { vec![(s, r)] } else { vec![] };
        b.tb_move(s, s, &format!("to:{}", states[to]), to, &rw);
    };
    let chain = |b: &mut GameBuilder, c: &[usize], end: usize| {
        for k in 0..c.len() {
            let to = if k + 1 < c.len() { c[k + 1] } else { end };
            mv(b, c[k], to, 0.0);
        }
    };
    let succ: Vec<Vec<usize>> = (0..n).map(|i| graph.succ(i)).collect();
    for i in 0..n {
        chain(&mut b, &aux_short[i], short[i]);
        chain(&mut b, &aux_long[i], long[i]);
        for j in (0..n).filter(|&j| j != i) {
            chain(&mut b, &sl[i][j], long[j]);
        }
    }
    for i in 0..n {
        for &j in &succ[i] {
            mv(&mut b, long[i], short[j], -1.0);
        }
        mv(&mut b, long[i], short[i], -1.0);
        mv(&mut b, long[i], aux_long[i][0], -1.0);
        for j in (0..n).filter(|&j| j != i) {
            mv(&mut b, short[i], sl[i][j][0], 1.0);
        }
        mv(&mut b, short[i], long[i], 1.0);
        mv(&mut b, short[i], aux_short[i][0], 1.0);
    }
    let g = b.build();
    debug_assert_eq!(g.num_states(), ns);
    Ok((g, HamiltonianMap { l, long, short, succ }))
}

/// Edges (i, j) where long_i moves to short_j, and whether they form a Hamiltonian cycle.
pub fn induced_subgraph(graph: &DirectedGraph, map: &HamiltonianMap, pi: &Strategy) -> Result<(DirectedGraph, bool)> {
    let mut edges = Vec::new();
    for i in 0..map.l {
        let s = map.long[i];
        let a = pi.pure_action(s, s).ok_or(SgError::NotPure)?;
        if let Some(&j) = map.succ[i].get(a) {
            edges.push((i, j));
        }
    }
    let sub = DirectedGraph { vertices: graph.vertices.clone(), edges };
    let ham = sub.is_hamiltonian_cycle();
    Ok((sub, ham))
}
