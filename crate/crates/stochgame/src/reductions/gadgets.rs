//! Generalized-circuit gadgets compiled into a one-state-per-player turn-based game.
//!
//! Every node is a player with actions `a1`/`a2`; p(v) is its probability of `a1`.
//! Each gate output owns its outgoing transitions, and every such transition
//! walks a length-L chain of single-action, zero-reward dummy players first.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Result, SgError};
use crate::game::{DiscountMode, GameBuilder, GameSpec, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GateKind {
    Eq,
    Const(f64),
    Mul(f64),
    Sum,
    Sub,
    Gt,
    And,
    Or,
    Not,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Const(_) => 0,
            GateKind::Eq | GateKind::Mul(_) | GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn is_logic(self) -> bool {
        matches!(self, GateKind::And | GateKind::Or | GateKind::Not)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Eq => "Eq",
            GateKind::Const(_) => "Const",
            GateKind::Mul(_) => "Mul",
            GateKind::Sum => "Sum",
            GateKind::Sub => "Sub",
            GateKind::Gt => "Gt",
            GateKind::And => "And",
            GateKind::Or => "Or",
            GateKind::Not => "Not",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitSpec {
    pub nodes: Vec<String>,
    pub gates: Vec<Gate>,
}

impl CircuitSpec {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SgError::InvalidCircuit(m));
        let mut seen = HashSet::new();
        for v in &self.nodes {
            if !seen.insert(v) {
                return bad(format!("duplicate node {v}"));
            }
        }
        let mut outs = HashSet::new();
        for (k, gate) in self.gates.iter().enumerate() {
            if gate.inputs.len() != gate.kind.arity() {
                return bad(format!(
                    "gate {k} ({}) takes {} inputs, got {}",
                    gate.kind.name(),
                    gate.kind.arity(),
                    gate.inputs.len()
                ));
            }
            for v in gate.inputs.iter().chain([&gate.output]) {
                if self.node_index(v).is_none() {
                    return bad(format!("gate {k} refers to unknown node {v}"));
                }
            }
            if !outs.insert(&gate.output) {
                return bad(format!("node {} is the output of two gates", gate.output));
            }
            if gate.inputs.contains(&gate.output) {
                return bad(format!("gate {k} reads its own output"));
            }
            if gate.inputs.len() == 2 && gate.inputs[0] == gate.inputs[1] {
                return bad(format!("gate {k} repeats input {}", gate.inputs[0]));
            }
            match gate.kind {
                GateKind::Mul(a) if !(a > 0.0 && a <= 2.0) => return bad(format!("Mul alpha {a} outside (0, 2]")),
                GateKind::Const(a) if !a.is_finite() => return bad(format!("Const alpha {a} is not finite")),
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GadgetParams {
    pub gamma: f64,
    pub eps: f64,
    /// Chain length ceil(4/(1-gamma) ln(1/eps)).
    pub l: usize,
    /// NE tolerance of the arithmetic gadgets.
    pub delta: f64,
    /// NE tolerance of the comparison gadget.
    pub delta_gt: f64,
}

impl GadgetParams {
    pub fn new(gamma: f64, eps: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(SgError::InvalidCircuit(format!("gamma {gamma} outside (0, 1)")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(SgError::InvalidCircuit(format!("eps {eps} outside (0, 1)")));
        }
        let l = ((4.0 / (1.0 - gamma)) * (1.0 / eps).ln()).ceil().max(1.0) as usize;
        let delta = (1.0 - gamma) * gamma.powi(l as i32 + 1) * eps / 8.0;
        let delta_gt = (1.0 - gamma) * gamma.powi(l as i32) * eps * eps / 2.0;
        if gamma.powi(l as i32) > eps * eps || delta <= 0.0 || delta_gt <= 0.0 {
            return Err(SgError::InvalidCircuit(format!("chain length {l} too short for eps {eps}")));
        }
        Ok(GadgetParams { gamma, eps, l, delta, delta_gt })
    }
}

/// Primitive gate after expanding logic gates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompiledGate {
    pub kind: GateKind,
    /// Node indices.
    pub inputs: Vec<usize>,
    pub output: usize,
    /// Aux player (and state); None for comparison gates.
    pub aux: Option<usize>,
    /// Index of the circuit gate this came from.
    pub source: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GadgetMap {
    pub params: GadgetParams,
    /// Circuit nodes first, then nodes introduced by logic-gate expansion.
    pub node_names: Vec<String>,
    /// Player (= state) of each node.
    pub node_player: Vec<usize>,
    pub user_nodes: usize,
    pub gates: Vec<CompiledGate>,
    pub circuit: CircuitSpec,
}

impl GadgetMap {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn p(&self, pi: &Strategy, node: usize) -> f64 {
        let s = self.node_player[node];
        pi.probs[s][s][0]
    }

    /// Strategy with node v playing a1 w.p. `nodes[v]` and aux of compiled gate k w.p. `aux[k]`.
    pub fn profile(&self, g: &GameSpec, nodes: &[f64], aux: &[f64]) -> Strategy {
        let mut pi = Strategy::uniform(g);
        let mut set = |s: usize, p: f64| pi.probs[s][s] = vec![p, 1.0 - p];
        for (v, &p) in nodes.iter().enumerate() {
            set(self.node_player[v], p);
        }
        for (gate, &p) in self.gates.iter().zip(aux) {
            if let Some(s) = gate.aux {
                set(s, p);
            }
        }
        pi
    }
}

/// One-state-per-player game under construction; player index = state index.
struct Tb {
    names: Vec<String>,
    acts: Vec<Vec<(String, Vec<(usize, f64)>)>>,
    rewards: HashMap<(usize, usize, usize), f64>,
}

impl Tb {
    fn add(&mut self, name: String) -> usize {
        self.names.push(name);
        self.acts.push(Vec::new());
        self.names.len() - 1
    }

    /// `from --name--> d1 -> ... -> d_{L-1} -> to`, L transitions in total.
    fn chain(&mut self, from: usize, name: &str, to: usize, l: usize, tag: &str) {
        let mut prev = (from, name.to_string());
        for k in 1..l {
            let d = self.add(format!("{}~{tag}{k}", self.names[from]));
            self.acts[prev.0].push((prev.1, vec![(d, 1.0)]));
            prev = (d, "next".to_string());
        }
        self.acts[prev.0].push((prev.1, vec![(to, 1.0)]));
    }

    fn reward(&mut self, player: usize, state: usize, action: usize, r: f64) {
        if r != 0.0 {
            self.rewards.insert((player, state, action), r);
        }
    }

    fn build(self, gamma: f64) -> Result<GameSpec> {
        let ns = self.names.len();
        let mut seen = HashSet::new();
        for v in &self.names {
            if !seen.insert(v) {
                return Err(SgError::InvalidCircuit(format!("generated name {v} clashes with a node")));
            }
        }
        let mut b = GameBuilder::named(self.names.clone(), self.names, DiscountMode::Discounted(gamma));
        for (s, acts) in self.acts.into_iter().enumerate() {
            for (name, to) in acts {
                let mut dist = vec![0.0; ns];
                for (t, p) in to {
                    dist[t] += p;
                }
                b.tb_action(s, s, &name, dist, &[]);
            }
        }
        for ((i, s, a), r) in self.rewards {
            b.reward(i, s, &[a], r);
        }
        Ok(b.build())
    }
}

const A1: usize = 0;
const A2: usize = 1;

fn expand(circuit: &CircuitSpec) -> (Vec<String>, Vec<(GateKind, Vec<usize>, usize, usize)>) {
    let mut names = circuit.nodes.clone();
    let mut prims = Vec::new();
    let idx = |names: &Vec<String>, v: &str| names.iter().position(|n| n == v).unwrap();
    for (k, gate) in circuit.gates.iter().enumerate() {
        let ins: Vec<usize> = gate.inputs.iter().map(|v| idx(&names, v)).collect();
        let out = idx(&names, &gate.output);
        let fresh = |names: &mut Vec<String>, tag: &str| {
            names.push(format!("{}#{tag}", gate.output));
            names.len() - 1
        };
        match gate.kind {
            GateKind::Or => prims.push((GateKind::Sum, ins, out, k)),
            GateKind::Not => {
                let one = fresh(&mut names, "one");
                prims.push((GateKind::Const(1.0), vec![], one, k));
                prims.push((GateKind::Sub, vec![one, ins[0]], out, k));
            }
            GateKind::And => {
                let h1 = fresh(&mut names, "half1");
                let h2 = fresh(&mut names, "half2");
                let sum = fresh(&mut names, "sum");
                let thr = fresh(&mut names, "thr");
                prims.push((GateKind::Mul(0.5), vec![ins[0]], h1, k));
                prims.push((GateKind::Mul(0.5), vec![ins[1]], h2, k));
                prims.push((GateKind::Sum, vec![h1, h2], sum, k));
                prims.push((GateKind::Const(0.75), vec![], thr, k));
                prims.push((GateKind::Gt, vec![sum, thr], out, k));
            }
            kind => prims.push((kind, ins, out, k)),
        }
    }
    (names, prims)
}

pub fn gcircuit_build(circuit: &CircuitSpec, params: &GadgetParams) -> Result<(GameSpec, GadgetMap)> {
    circuit.validate()?;
    let GadgetParams { gamma, eps, l, .. } = *params;
    if eps > 1.0 / 12.0 && circuit.gates.iter().any(|g| g.kind.is_logic()) {
        return Err(SgError::InvalidCircuit(format!("logic gates need eps <= 1/12, got {eps}")));
    }
    let (node_names, prims) = expand(circuit);
    let mut tb = Tb { names: Vec::new(), acts: Vec::new(), rewards: HashMap::new() };
    let node_player: Vec<usize> = node_names.iter().map(|v| tb.add(v.clone())).collect();
    let mut gates = Vec::with_capacity(prims.len());
    for (kind, ins, out, source) in prims {
        let aux = (kind != GateKind::Gt).then(|| tb.add(format!("aux:{}", node_names[out])));
        gates.push(CompiledGate { kind, inputs: ins, output: out, aux, source });
    }
    let driven: HashSet<usize> = gates.iter().map(|g| g.output).collect();
    for v in 0..node_names.len() {
        if !driven.contains(&v) {
            let s = node_player[v];
            tb.chain(s, "a1", s, l, "c");
            tb.chain(s, "a2", s, l, "d");
        }
    }
    let gl1 = gamma.powi(l as i32 + 1);
    for gate in &gates {
        let out = node_player[gate.output];
        let ins: Vec<usize> = gate.inputs.iter().map(|&v| node_player[v]).collect();
        let Some(aux) = gate.aux else {
            tb.chain(out, "a1", ins[0], l, "p");
            tb.chain(out, "a2", ins[1], l, "q");
            tb.reward(out, ins[0], A1, 1.0);
            tb.reward(out, ins[1], A1, 1.0);
            continue;
        };
        tb.chain(out, "a1", out, l, "c");
        tb.chain(out, "a2", aux, l, "p");
        match gate.kind {
            GateKind::Const(_) => tb.acts[aux].push(("a1".into(), vec![(aux, 1.0)])),
            GateKind::Sum | GateKind::Sub => tb.acts[aux].push(("a1".into(), vec![(ins[0], 0.5), (ins[1], 0.5)])),
            _ => tb.acts[aux].push(("a1".into(), vec![(ins[0], 1.0)])),
        }
        tb.acts[aux].push(("a2".into(), vec![(out, 1.0)]));

        tb.reward(aux, aux, A2, -gamma / 2.0);
        tb.reward(aux, out, A1, 1.0);
        tb.reward(aux, out, A2, 0.5);
        tb.reward(out, aux, A2, 3.0 * gamma / 4.0);
        tb.reward(out, out, A1, gl1 / 4.0);
        match gate.kind {
            GateKind::Const(alpha) => {
                tb.reward(aux, aux, A1, gamma * (1.0 - gamma) * alpha / 2.0);
                tb.reward(out, aux, A1, -gamma / 4.0);
            }
            GateKind::Eq | GateKind::Mul(_) => {
                let a = if let GateKind::Mul(alpha) = gate.kind { alpha } else { 1.0 };
                tb.reward(aux, ins[0], A1, a / 2.0);
                tb.reward(out, ins[0], A1, -0.25);
                tb.reward(out, ins[0], A2, -0.25);
            }
            GateKind::Sum | GateKind::Sub => {
                let sign = if gate.kind == GateKind::Sub { -1.0 } else { 1.0 };
                tb.reward(aux, ins[0], A1, 1.0);
                tb.reward(aux, ins[1], A1, sign);
                for &s in &ins {
                    tb.reward(out, s, A1, -0.25);
                    tb.reward(out, s, A2, -0.25);
                }
            }
            _ => unreachable!(),
        }
    }
    let game = tb.build(gamma)?;
    let user_nodes = circuit.nodes.len();
    Ok((game, GadgetMap { params: *params, node_names, node_player, user_nodes, gates, circuit: circuit.clone() }))
}

fn med(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(|x, y| x.total_cmp(y));
    v[1]
}

/// Admissible output interval of a circuit gate at accuracy eps.
pub fn gate_interval(kind: GateKind, ins: &[f64], eps: f64) -> (f64, f64) {
    let hi_if = |c: bool| if c { (1.0 - eps, 1.0) } else { (0.0, 1.0) };
    let lo_if = |c: bool| if c { (0.0, eps) } else { (0.0, 1.0) };
    match kind {
        GateKind::Eq => (ins[0] - eps, ins[0] + eps),
        GateKind::Const(a) => (med(0.0, a - eps, 1.0 - eps), med(1.0, a + eps, eps)),
        GateKind::Mul(a) => (med(0.0, a * (ins[0] - eps), 1.0 - eps), med(1.0, a * (ins[0] + eps), eps)),
        GateKind::Sum => {
            let s = ins[0] + ins[1];
            (med(0.0, s - eps, 1.0 - eps), (s + eps).min(1.0))
        }
        GateKind::Sub => {
            let d = ins[0] - ins[1];
            ((d - eps).max(0.0), med(1.0, d + eps, eps))
        }
        GateKind::Gt => {
            if ins[0] >= ins[1] + eps {
                hi_if(true)
            } else {
                lo_if(ins[0] <= ins[1] - eps)
            }
        }
        GateKind::And => {
            if ins[0] <= eps || ins[1] <= eps {
                lo_if(true)
            } else {
                hi_if(ins[0] >= 1.0 - eps && ins[1] >= 1.0 - eps)
            }
        }
        GateKind::Or => {
            if ins[0] >= 1.0 - eps || ins[1] >= 1.0 - eps {
                hi_if(true)
            } else {
                lo_if(ins[0] <= eps && ins[1] <= eps)
            }
        }
        GateKind::Not => {
            if ins[0] >= 1.0 - eps {
                lo_if(true)
            } else {
                hi_if(ins[0] <= eps)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateCheck {
    pub gate: usize,
    pub kind: &'static str,
    pub output: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitAssignment {
    /// (node name, p) for circuit nodes, in circuit order.
    pub assignment: Vec<(String, f64)>,
    pub gates: Vec<GateCheck>,
    pub all_pass: bool,
}

/// Read p(v) = pi_v(a1) off a strategy and check every circuit gate.
pub fn circuit_assignment(map: &GadgetMap, pi: &Strategy, eps: f64) -> CircuitAssignment {
    let p: Vec<f64> = (0..map.user_nodes).map(|v| map.p(pi, v)).collect();
    let gates: Vec<GateCheck> = map
        .circuit
        .gates
        .iter()
        .enumerate()
        .map(|(k, gate)| {
            let ins: Vec<f64> = gate.inputs.iter().map(|v| p[map.node_index(v).unwrap()]).collect();
            let out = p[map.node_index(&gate.output).unwrap()];
            let (lo, hi) = gate_interval(gate.kind, &ins, eps);
            let pass = out >= lo - 1e-12 && out <= hi + 1e-12;
            GateCheck { gate: k, kind: gate.kind.name(), output: out, lo, hi, pass }
        })
        .collect();
    let all_pass = gates.iter().all(|c| c.pass);
    let assignment = map.node_names[..map.user_nodes].iter().cloned().zip(p).collect();
    CircuitAssignment { assignment, gates, all_pass }
}
