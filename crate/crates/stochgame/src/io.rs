//! JSON formats for games, strategies, circuits, graphs and reports.

use serde_json::{json, Map, Value};

use crate::certify::NeCertificate;
use crate::error::{Result, SgError};
use crate::eval::{BellmanReport, ValueProfile};
use crate::game::{DiscountMode, GameSpec, NonStationaryStrategy, Strategy};
use crate::reductions::{CircuitSpec, DirectedGraph, Gate, GateKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Distributions off by more than this are left for validation to reject.
const RENORM_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;

fn perr(msg: impl Into<String>) -> SgError {
    SgError::Parse(msg.into())
}

fn obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| perr(format!("{what} must be an object")))
}

fn arr<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(format!("{what} must be an array")))
}

fn string(v: &Value, what: &str) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| perr(format!("{what} must be a string")))
}

fn num(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| perr(format!("{what} must be a number")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| perr(format!("{what} is missing \"{key}\"")))
}

fn lookup(names: &[String], name: &str, what: &str) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| perr(format!("unknown {what} \"{name}\"")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| perr(e.to_string()))
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values always serialize")
}

fn renormalize(dist: &mut [f64]) {
    let total: f64 = dist.iter().sum();
    let dev = (total - 1.0).abs();
    if dev > EXACT_TOL && dev <= RENORM_TOL {
        dist.iter_mut().for_each(|p| *p /= total);
    }
}

/// Joint index at `s` from a {player: action} map.
fn parse_joint(g: &GameSpec, s: usize, v: &Value, what: &str) -> Result<usize> {
    let m = obj(v, what)?;
    let ctrl = &g.controllers[s];
    if m.len() != ctrl.len() {
        return Err(perr(format!("{what}: expected actions of {} controllers", ctrl.len())));
    }
    let mut acts = Vec::with_capacity(ctrl.len());
    for &i in ctrl {
        let a = m
            .get(&g.players[i])
            .ok_or_else(|| perr(format!("{what}: no action for player {}", g.players[i])))?;
        let a = string(a, what)?;
        acts.push(lookup(&g.actions[i][s], &a, "action")?);
    }
    Ok(g.encode_joint(s, &acts))
}

pub fn game_from_json(v: &Value) -> Result<GameSpec> {
    let m = obj(v, "game")?;
    let n = field(m, "players", "game")?
        .as_u64()
        .ok_or_else(|| perr("\"players\" must be a non-negative integer"))? as usize;
    let states: Vec<String> = arr(field(m, "states", "game")?, "states")?
        .iter()
        .map(|s| string(s, "state name"))
        .collect::<Result<_>>()?;
    let ns = states.len();
    let acts = obj(field(m, "actions", "game")?, "actions")?;
    if acts.len() != n {
        return Err(perr(format!("\"actions\" lists {} players, expected {n}", acts.len())));
    }
    let players: Vec<String> = acts.keys().cloned().collect();
    let mut actions = vec![vec![Vec::new(); ns]; n];
    for (i, per_state) in acts.values().enumerate() {
        for (sname, list) in obj(per_state, "actions entry")? {
            let s = lookup(&states, sname, "state")?;
            actions[i][s] = arr(list, "action list")?.iter().map(|a| string(a, "action")).collect::<Result<_>>()?;
        }
    }
    let mut controllers = vec![Vec::new(); ns];
    for (sname, list) in obj(field(m, "controllers", "game")?, "controllers")? {
        let s = lookup(&states, sname, "state")?;
        controllers[s] = arr(list, "controller list")?
            .iter()
            .map(|p| lookup(&players, &string(p, "player")?, "player"))
            .collect::<Result<_>>()?;
    }
    let disc = obj(field(m, "discount", "game")?, "discount")?;
    let mode = string(field(disc, "mode", "discount")?, "discount mode")?;
    let discount = match mode.as_str() {
        "discounted" => DiscountMode::Discounted(num(field(disc, "gamma", "discount")?, "gamma")?),
        "absorbing" => DiscountMode::Absorbing,
        "average" => DiscountMode::AverageReward,
        other => return Err(perr(format!("unknown discount mode \"{other}\""))),
    };
    let absorbing_state = match disc.get("absorbing_state") {
        None | Some(Value::Null) => None,
        Some(v) => Some(lookup(&states, &string(v, "absorbing_state")?, "state")?),
    };
    let mut g = GameSpec {
        players,
        states,
        controllers,
        actions,
        transitions: Vec::new(),
        rewards: Vec::new(),
        discount,
        absorbing_state,
    };
    g.transitions = (0..ns).map(|s| vec![vec![0.0; ns]; g.joint_count(s)]).collect();
    g.rewards = (0..n).map(|_| (0..ns).map(|s| vec![0.0; g.joint_count(s)]).collect()).collect();
    let mut seen = vec![vec![false; 0]; ns];
    for s in 0..ns {
        seen[s] = vec![false; g.joint_count(s)];
    }
    for t in arr(field(m, "transitions", "game")?, "transitions")? {
        let t = obj(t, "transition")?;
        let s = lookup(&g.states, &string(field(t, "state", "transition")?, "state")?, "state")?;
        let j = parse_joint(&g, s, field(t, "joint", "transition")?, "transition joint")?;
        if std::mem::replace(&mut seen[s][j], true) {
            return Err(perr(format!("duplicate transition at state {}", g.states[s])));
        }
        let mut row = vec![0.0; ns];
        for (to, p) in obj(field(t, "dist", "transition")?, "dist")? {
            row[lookup(&g.states, to, "state")?] += num(p, "probability")?;
        }
        renormalize(&mut row);
        g.transitions[s][j] = row;
    }
    for r in arr(field(m, "rewards", "game")?, "rewards")? {
        let r = obj(r, "reward")?;
        let i = lookup(&g.players, &string(field(r, "player", "reward")?, "player")?, "player")?;
        let s = lookup(&g.states, &string(field(r, "state", "reward")?, "state")?, "state")?;
        let j = parse_joint(&g, s, field(r, "joint", "reward")?, "reward joint")?;
        g.rewards[i][s][j] = num(field(r, "r", "reward")?, "reward")?;
    }
    Ok(g)
}

fn joint_json(g: &GameSpec, s: usize, j: usize) -> Value {
    let acts = g.decode_joint(s, j);
    let mut m = Map::new();
    for (&i, a) in g.controllers[s].iter().zip(acts) {
        m.insert(g.players[i].clone(), Value::from(g.actions[i][s][a].clone()));
    }
    Value::Object(m)
}

pub fn game_to_json(g: &GameSpec) -> Value {
    let ns = g.num_states();
    let mut controllers = Map::new();
    for s in 0..ns {
        let c: Vec<Value> = g.controllers[s].iter().map(|&i| Value::from(g.players[i].clone())).collect();
        controllers.insert(g.states[s].clone(), Value::Array(c));
    }
    let mut actions = Map::new();
    for i in 0..g.n() {
        let mut per = Map::new();
        for s in 0..ns {
            if !g.actions[i][s].is_empty() {
                per.insert(g.states[s].clone(), json!(g.actions[i][s]));
            }
        }
        actions.insert(g.players[i].clone(), Value::Object(per));
    }
    let mut transitions = Vec::new();
    for s in 0..ns {
        for (j, row) in g.transitions[s].iter().enumerate() {
            let mut dist = Map::new();
            for (t, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    dist.insert(g.states[t].clone(), json!(p));
                }
            }
            transitions.push(json!({"state": g.states[s], "joint": joint_json(g, s, j), "dist": dist}));
        }
    }
    let mut rewards = Vec::new();
    for i in 0..g.n() {
        for s in 0..ns {
            for (j, &r) in g.rewards[i][s].iter().enumerate() {
                if r != 0.0 {
                    rewards.push(json!({"player": g.players[i], "state": g.states[s], "joint": joint_json(g, s, j), "r": r}));
                }
            }
        }
    }
    let mut discount = Map::new();
    match g.discount {
        DiscountMode::Discounted(gamma) => {
            discount.insert("mode".into(), json!("discounted"));
            discount.insert("gamma".into(), json!(gamma));
        }
        DiscountMode::Absorbing => {
            discount.insert("mode".into(), json!("absorbing"));
        }
        DiscountMode::AverageReward => {
            discount.insert("mode".into(), json!("average"));
        }
    }
    if let Some(s) = g.absorbing_state {
        discount.insert("absorbing_state".into(), json!(g.states[s]));
    }
    json!({
        "players": g.n(),
        "states": g.states,
        "controllers": controllers,
        "actions": actions,
        "transitions": transitions,
        "rewards": rewards,
        "discount": discount,
    })
}

/// `{player: {state: {action: prob}}}`, or `{player: {state: "action"}}` for a
/// point mass. States with a single action may be left out.
pub fn strategy_from_json(g: &GameSpec, v: &Value) -> Result<Strategy> {
    let mut pi = Strategy::uniform(g);
    let m = obj(v, "strategy")?;
    let mut given = vec![vec![false; g.num_states()]; g.n()];
    for (pname, per) in m {
        let i = lookup(&g.players, pname, "player")?;
        for (sname, d) in obj(per, "strategy entry")? {
            let s = lookup(&g.states, sname, "state")?;
            let acts = &g.actions[i][s];
            if acts.is_empty() {
                return Err(perr(format!("player {pname} has no actions at {sname}")));
            }
            let mut row = vec![0.0; acts.len()];
            match d {
                Value::String(a) => row[lookup(acts, a, "action")?] = 1.0,
                Value::Object(dm) => {
                    for (a, p) in dm {
                        row[lookup(acts, a, "action")?] = num(p, "probability")?;
                    }
                    renormalize(&mut row);
                }
                _ => return Err(perr("policy must be an action name or an {action: prob} map")),
            }
            pi.probs[i][s] = row;
            given[i][s] = true;
        }
    }
    for i in 0..g.n() {
        for s in g.controlled_states(i) {
            if !given[i][s] && g.actions[i][s].len() > 1 {
                return Err(perr(format!("no policy for player {} at {}", g.players[i], g.states[s])));
            }
        }
    }
    pi.validate(g)?;
    Ok(pi)
}

pub fn strategy_to_json(g: &GameSpec, pi: &Strategy) -> Value {
    let mut m = Map::new();
    for i in 0..g.n() {
        let mut per = Map::new();
        for s in g.controlled_states(i) {
            let mut d = Map::new();
            for (a, &p) in pi.probs[i][s].iter().enumerate() {
                d.insert(g.actions[i][s][a].clone(), json!(p));
            }
            per.insert(g.states[s].clone(), Value::Object(d));
        }
        m.insert(g.players[i].clone(), Value::Object(per));
    }
    Value::Object(m)
}

pub fn nonstationary_to_json(g: &GameSpec, ns: &NonStationaryStrategy) -> Value {
    json!({
        "horizon": ns.horizon(),
        "steps": ns.steps.iter().map(|p| strategy_to_json(g, p)).collect::<Vec<_>>(),
        "tail": strategy_to_json(g, &ns.tail),
    })
}

pub fn nonstationary_from_json(g: &GameSpec, v: &Value) -> Result<NonStationaryStrategy> {
    let m = obj(v, "non-stationary strategy")?;
    let steps: Vec<Strategy> = arr(field(m, "steps", "non-stationary strategy")?, "steps")?
        .iter()
        .map(|s| strategy_from_json(g, s))
        .collect::<Result<_>>()?;
    if let Some(h) = m.get("horizon") {
        if h.as_u64() != Some(steps.len() as u64) {
            return Err(perr("\"horizon\" does not match the number of steps"));
        }
    }
    let tail = strategy_from_json(g, field(m, "tail", "non-stationary strategy")?)?;
    Ok(NonStationaryStrategy { steps, tail })
}

pub fn circuit_from_json(v: &Value) -> Result<CircuitSpec> {
    let m = obj(v, "circuit")?;
    let nodes: Vec<String> = arr(field(m, "nodes", "circuit")?, "nodes")?
        .iter()
        .map(|x| string(x, "node"))
        .collect::<Result<_>>()?;
    let mut gates = Vec::new();
    for gv in arr(field(m, "gates", "circuit")?, "gates")? {
        let gm = obj(gv, "gate")?;
        let alpha = || num(field(gm, "alpha", "gate")?, "alpha");
        let kind = match string(field(gm, "kind", "gate")?, "kind")?.as_str() {
            "eq" => GateKind::Eq,
            "const" => GateKind::Const(alpha()?),
            "mul" => GateKind::Mul(alpha()?),
            "sum" => GateKind::Sum,
            "sub" => GateKind::Sub,
            "gt" => GateKind::Gt,
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "not" => GateKind::Not,
            other => return Err(perr(format!("unknown gate kind \"{other}\""))),
        };
        let inputs = match gm.get("in") {
            None => Vec::new(),
            Some(x) => arr(x, "gate inputs")?.iter().map(|x| string(x, "node")).collect::<Result<_>>()?,
        };
        let output = string(field(gm, "out", "gate")?, "out")?;
        gates.push(Gate { kind, inputs, output });
    }
    let c = CircuitSpec { nodes, gates };
    c.validate()?;
    Ok(c)
}

pub fn circuit_to_json(c: &CircuitSpec) -> Value {
    let gates: Vec<Value> = c
        .gates
        .iter()
        .map(|g| {
            let mut m = Map::new();
            m.insert("kind".into(), json!(g.kind.name().to_lowercase()));
            if let GateKind::Const(a) | GateKind::Mul(a) = g.kind {
                m.insert("alpha".into(), json!(a));
            }
            m.insert("in".into(), json!(g.inputs));
            m.insert("out".into(), json!(g.output));
            Value::Object(m)
        })
        .collect();
    json!({"nodes": c.nodes, "gates": gates})
}

/// Edge endpoints may be vertex names or indices.
pub fn graph_from_json(v: &Value) -> Result<DirectedGraph> {
    let m = obj(v, "graph")?;
    let vertices: Vec<String> = arr(field(m, "vertices", "graph")?, "vertices")?
        .iter()
        .map(|x| match x {
            Value::String(s) => Ok(s.clone()),
            Value::Number(k) => Ok(k.to_string()),
            _ => Err(perr("vertex must be a string or integer")),
        })
        .collect::<Result<_>>()?;
    let end = |x: &Value| -> Result<usize> {
        match x {
            Value::String(s) => lookup(&vertices, s, "vertex"),
            Value::Number(_) => {
                let k = x.as_u64().ok_or_else(|| perr("vertex index must be a non-negative integer"))? as usize;
                if vertices.iter().any(|v| v == &k.to_string()) {
                    lookup(&vertices, &k.to_string(), "vertex")
                } else if k < vertices.len() {
                    Ok(k)
                } else {
                    Err(perr(format!("vertex index {k} out of range")))
                }
            }
            _ => Err(perr("edge endpoint must be a vertex name or index")),
        }
    };
    let mut edges = Vec::new();
    for e in arr(field(m, "edges", "graph")?, "edges")? {
        let pair = arr(e, "edge")?;
        if pair.len() != 2 {
            return Err(perr("edge must be [src, dst]"));
        }
        edges.push((end(&pair[0])?, end(&pair[1])?));
    }
    DirectedGraph::new(vertices, edges)
}

pub fn graph_to_json(gr: &DirectedGraph) -> Value {
    let edges: Vec<Value> = gr
        .edges
        .iter()
        .map(|&(a, b)| json!([gr.vertices[a], gr.vertices[b]]))
        .collect();
    json!({"vertices": gr.vertices, "edges": edges})
}

/// Wrap a report body as `{"schema_version": 1, "kind": kind, ...body}`.
pub fn report(kind: &str, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("kind".into(), json!(kind));
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

pub fn values_to_json(g: &GameSpec, vp: &ValueProfile) -> Value {
    let mut values = Vec::new();
    for i in 0..g.n() {
        for s in 0..g.num_states() {
            values.push(json!({"player": g.players[i], "state": g.states[s], "value": vp.values[i][s]}));
        }
    }
    let mut m = Map::new();
    m.insert("values".into(), Value::Array(values));
    let utilities: Map<String, Value> =
        g.players.iter().cloned().zip(vp.utilities.iter().map(|&u| json!(u))).collect();
    m.insert("utilities".into(), Value::Object(utilities));
    if let Some(own) = &vp.own_values {
        let own: Map<String, Value> = g.players.iter().cloned().zip(own.iter().map(|&u| json!(u))).collect();
        m.insert("own_values".into(), Value::Object(own));
    }
    Value::Object(m)
}

pub fn bellman_to_json(g: &GameSpec, rep: &BellmanReport) -> Value {
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "player": g.players[e.player],
                "state": g.states[e.state],
                "action": g.actions[e.player][e.state][e.action],
                "psi": e.psi,
                "upsilon": e.upsilon,
            })
        })
        .collect();
    json!({"entries": entries, "max_upsilon": rep.max_upsilon})
}

pub fn certificate_to_json(g: &GameSpec, c: &NeCertificate) -> Value {
    let witness = c.witness.as_ref().map(|w| {
        let mut m = Map::new();
        m.insert("player".into(), json!(g.players[w.player]));
        m.insert("state".into(), json!(g.states[w.state]));
        m.insert("action".into(), json!(g.actions[w.player][w.state][w.action]));
        if let Some(t) = w.step {
            m.insert("step".into(), json!(t));
        }
        Value::Object(m)
    });
    let gaps: Map<String, Value> = g.players.iter().cloned().zip(c.gaps.iter().map(|&x| json!(x))).collect();
    json!({
        "mode": c.mode,
        "epsilon": c.epsilon,
        "max_gap": c.max_gap,
        "pass": c.pass,
        "gaps": gaps,
        "witness": witness,
    })
}
