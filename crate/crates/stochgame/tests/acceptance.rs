//! Acceptance criteria, one test per criterion. Each prints a single PASS/FAIL line.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::Weights;
use stochgame::certify::{
    certify_deviation, check_bellman_ne, deviation_gap, max_gaps_by, nonstationary_certify, pseudo_linearity_probe,
    BellmanMode,
};
use stochgame::eval::{absorbing_value, average_reward_value, bellman_errors, utility, value_function};
use stochgame::gen;
use stochgame::par::Exec;
use stochgame::reductions::{
    average_to_discounted, circuit_assignment, discounted_to_absorbing, gcircuit_build, hamiltonian_delta,
    hamiltonian_game_build, induced_subgraph, mixing_time, simsg_to_ossg, CircuitSpec, DirectedGraph, GadgetParams,
    Gate, GateKind,
};
use stochgame::solvers::{
    backward_induction, brouwer_map, brute_force_value_net, cycle_ne_graph, implied_epsilon, lipschitz_bound,
    lp_policies_for_values, pure_ne_enumerate, strategy_iteration_locreward, BrouwerMode, CycleSign, SolvedStrategy,
    DEFAULT_ENUM_BUDGET, DEFAULT_NET_BUDGET,
};
use stochgame::{
    mix_strategy, DiscountMode, GameBuilder, GameSpec, InitialDistribution, NonStationaryStrategy, RewardSign,
    Strategy,
};

fn verdict(id: u32, name: &str, ok: bool, start: Instant, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {detail} ({:.2}s)", start.elapsed().as_secs_f64());
    assert!(ok, "criterion {id} failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn positive_dist(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| r.random::<f64>() + 0.05).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

// 1 -------------------------------------------------------------------------

/// Two players; player 1 owns A and B, player 2 owns C. Rewards scaled by 1 - gamma.
fn three_state_tbsg() -> GameSpec {
    let gamma: f64 = 5.0 / 6.0;
    let mut b = GameBuilder::named(
        vec!["1".into(), "2".into()],
        vec!["A".into(), "B".into(), "C".into()],
        DiscountMode::Discounted(gamma),
    );
    let w = 1.0 - gamma;
    b.tb_action(0, 0, "1", vec![0.4, 0.2, 0.4], &[(0, 1.1 * w)]);
    b.tb_action(0, 0, "2", vec![0.2, 0.4, 0.4], &[(0, w)]);
    b.tb_action(1, 0, "1", vec![1.0 / 15.0, 0.8, 2.0 / 15.0], &[]);
    b.tb_action(1, 0, "2", vec![0.4, 0.2, 0.4], &[]);
    b.tb_action(2, 1, "1", vec![1.0 / 3.0; 3], &[]);
    b.tb_action(2, 1, "2", vec![0.4, 0.4, 0.2], &[]);
    b.build()
}

#[test]
fn criterion_01_counterexample_segment() {
    let t = Instant::now();
    let g = three_state_tbsg();
    let at = |lam: f64| -> f64 {
        let e = |a: usize| if a == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
        let pi = Strategy { probs: vec![vec![e(0), e(0), vec![]], vec![vec![], vec![], e(1)]] };
        let alt = vec![e(1), e(1), vec![]];
        let mixed = mix_strategy(&g, &pi, 0, &alt, 1.0 - lam).unwrap();
        utility(&g, &mixed, 0, &InitialDistribution::Dist(vec![1.0, 0.0, 0.0])).unwrap()
    };
    let formula = |l: f64| (63.0 - 37.0 * l) * (1.0 + 0.1 * l) / (4.0 * l * l - 84.0 * l + 147.0);
    let mut worst: f64 = 0.0;
    for lam in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let v = at(lam);
        worst = worst.max((v - formula(lam)).abs());
        let mix = vec![lam, 1.0 - lam];
        let direct = Strategy { probs: vec![vec![mix.clone(), mix, vec![]], vec![vec![], vec![], vec![0.0, 1.0]]] };
        let oracle = common::utility(&g, &direct, 0, &Weights::Dist(vec![1.0, 0.0, 0.0]));
        worst = worst.max((oracle - formula(lam)).abs());
    }
    let (v0, vh, v1) = (at(0.0), at(0.5), at(1.0));
    let class = stochgame::classify_game(&g).unwrap();
    let ok = worst <= 1e-9
        && vh > v0
        && vh > v1
        && (v0 - 63.0 / 147.0).abs() < 1e-9
        && (v1 - 28.6 / 67.0).abs() < 1e-9
        && class.is_tbsg
        && !class.is_ossg
        && t.elapsed().as_secs_f64() < 1.0;
    verdict(1, "counterexample segment", ok, t, format!("max err {worst:.2e}, V(0.5) = {vh:.6} vs {v0:.6}, {v1:.6}"));
}

// 2 -------------------------------------------------------------------------

#[test]
fn criterion_02_pseudo_linearity() {
    let t = Instant::now();
    let mut r = rng(2);
    let thetas: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let (mut checked, mut bad) = (0, 0);
    for _ in 0..1000 {
        let n = r.random_range(1..=4);
        let g = gen::random_ossg(&mut r, n, 3, 0.5);
        let gamma = 0.5;
        let ctx = gen::random_strategy(&mut r, &g);
        let i = r.random_range(0..n);
        let own = g.controlled_states(i)[0];
        let m = g.actions[i][own].len();
        let mut pa = vec![Vec::new(); g.num_states()];
        let mut pb = pa.clone();
        pa[own] = gen::random_dist(&mut r, m);
        pb[own] = gen::random_dist(&mut r, m);
        let q = positive_dist(&mut r, g.num_states());
        let w = Weights::Dist(q.clone());
        let seg = |th: f64| -> f64 {
            let base = mix_strategy(&g, &ctx, i, &pa, 1.0).unwrap();
            let s = mix_strategy(&g, &base, i, &pb, th).unwrap();
            common::utility(&g, &s, i, &w)
        };
        let (ua, ub) = (seg(0.0), seg(1.0));
        if (ub - ua).abs() <= 1e-6 {
            continue;
        }
        checked += 1;
        let mut fine = true;
        for &th in &thetas {
            let ratio = (seg(th) - ua) / (ub - ua);
            if ratio < (1.0 - gamma) * th - 1e-8 || ratio > th / (1.0 - gamma) + 1e-8 {
                fine = false;
            }
        }
        let probe =
            pseudo_linearity_probe(&g, i, &pa, &pb, &ctx, &thetas, &InitialDistribution::Dist(q), 1e-8).unwrap();
        if !fine || !probe.all_within_bounds || !probe.monotone {
            bad += 1;
        }
    }
    let ok = bad == 0 && checked > 500 && t.elapsed().as_secs_f64() < 30.0;
    verdict(2, "pseudo-linearity ratio bounds", ok, t, format!("{checked} segments checked, {bad} violations"));
}

// 3 -------------------------------------------------------------------------

#[test]
fn criterion_03_bellman_consistency() {
    let t = Instant::now();
    let mut r = rng(3);
    let (mut suff_hits, mut nec_hits, mut bad) = (0, 0, 0);
    let mut worst_disagree: f64 = 0.0;
    for k in 0..500 {
        let n = r.random_range(1..=2);
        let ns = r.random_range(1..=3);
        let gamma = r.random_range(0.3..0.9);
        let g = gen::random_simsg(&mut r, n, ns, 2, gamma);
        let pi = if k % 2 == 0 {
            gen::random_strategy(&mut r, &g)
        } else {
            // near the best pure profile, so small epsilons are exercised
            let best = common::all_pure(&g)
                .into_iter()
                .map(|p| (common::max_gap(&g, &p, &Weights::Uniform), p))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap()
                .1;
            let noise = gen::random_strategy(&mut r, &g);
            let th = r.random_range(0.0..0.05);
            let mut p = best.clone();
            for i in 0..n {
                p = mix_strategy(&g, &p, i, &noise.probs[i], th).unwrap();
            }
            p
        };
        let gap = common::max_gap(&g, &pi, &Weights::Uniform);
        let lib = deviation_gap(&g, &pi, &InitialDistribution::Uniform).unwrap().max_gap;
        worst_disagree = worst_disagree.max((gap - lib).abs());
        let eps = if k % 4 < 2 { r.random_range(0.01..1.0) } else { gap * r.random_range(0.3..3.0) + 1e-9 };
        let suff = check_bellman_ne(&g, &pi, eps, BellmanMode::Sufficient).unwrap();
        let nec = check_bellman_ne(&g, &pi, eps, BellmanMode::Necessary).unwrap();
        if suff.pass {
            suff_hits += 1;
            if gap > eps + 1e-8 {
                bad += 1;
            }
        }
        if gap <= eps {
            nec_hits += 1;
            if !nec.pass {
                bad += 1;
            }
        }
    }
    let ok = bad == 0 && suff_hits > 20 && nec_hits > 20 && worst_disagree < 1e-9 && t.elapsed().as_secs_f64() < 60.0;
    verdict(
        3,
        "Bellman vs deviation gap",
        ok,
        t,
        format!("{suff_hits} sufficient passes, {nec_hits} gaps within eps, {bad} violations"),
    );
}

// 4 -------------------------------------------------------------------------

fn si_bound(n: usize, gamma: f64, eps: f64) -> f64 {
    n as f64 * (2.0 * (1.0 + gamma) / ((1.0 - gamma).powi(2) * eps)).ln() / (1.0 + (1.0 - gamma) * eps / 2.0).ln()
}

#[test]
fn criterion_04_strategy_iteration() {
    let t = Instant::now();
    let mut r = rng(4);
    let eps = 0.05;
    let (mut bad, mut compared, mut max_iter_ratio) = (0, 0, 0.0f64);
    for k in 0..50 {
        let n = r.random_range(1..=4);
        let gamma = if k % 3 == 0 { 0.8 } else { 0.5 };
        let sign = if k % 2 == 0 { RewardSign::NonNegative } else { RewardSign::NonPositive };
        let g = gen::random_locreward(&mut r, n, 3, gamma, sign);
        let res = strategy_iteration_locreward(&g, eps).unwrap();
        let pi = res.strategy.stationary().unwrap().clone();
        let gap = common::max_gap(&g, &pi, &Weights::Own);
        let us: Vec<f64> = (0..n).map(|i| common::utility(&g, &pi, i, &Weights::Own)).collect();
        let oracle = common::pure_nash(&g, &Weights::Own, 1e-12);
        let close = oracle.is_empty()
            || oracle.iter().any(|ne| {
                (0..n).all(|i| (common::utility(&g, ne, i, &Weights::Own) - us[i]).abs() <= eps + 1e-9)
            });
        if !oracle.is_empty() {
            compared += 1;
        }
        let bound = si_bound(n, gamma, eps);
        max_iter_ratio = max_iter_ratio.max(res.iterations as f64 / bound);
        if !res.certificate.pass || gap > eps + 1e-9 || !close || res.iterations as f64 > bound {
            bad += 1;
        }
    }
    let ok = bad == 0 && compared > 0 && t.elapsed().as_secs_f64() < 120.0;
    verdict(
        4,
        "strategy iteration vs oracle",
        ok,
        t,
        format!("{bad} failures, {compared} compared with oracle NE sets, iterations <= {max_iter_ratio:.3} x bound"),
    );
}

// 5 -------------------------------------------------------------------------

#[test]
fn criterion_05_cycle_solvers() {
    let t = Instant::now();
    let mut r = rng(5);
    let (mut bad, mut worst, mut set_checked) = (0, 0.0f64, 0);
    for k in 0..100 {
        let nv = r.random_range(2..=8);
        let gamma = r.random_range(0.3..0.8);
        let (sign, cs) = if k % 2 == 0 {
            (RewardSign::NonNegative, CycleSign::NonNegative)
        } else {
            (RewardSign::NonPositive, CycleSign::NonPositive)
        };
        let g = gen::random_graph_game(&mut r, nv, 3, gamma, sign);
        let res = cycle_ne_graph(&g, cs).unwrap();
        let pi = res.strategy.stationary().unwrap().clone();
        let gap = common::max_gap(&g, &pi, &Weights::Own);
        worst = worst.max(gap);
        let found = pure_ne_enumerate(&g, 1e-12, &InitialDistribution::OwnState, DEFAULT_ENUM_BUDGET, Exec::default())
            .unwrap();
        let listed = found.iter().any(|(p, _)| p == &pi);
        let mut same_set = true;
        if nv <= 5 {
            set_checked += 1;
            let oracle = common::pure_nash(&g, &Weights::Own, 1e-9);
            let lib = pure_ne_enumerate(&g, 1e-9, &InitialDistribution::OwnState, DEFAULT_ENUM_BUDGET, Exec::default())
                .unwrap();
            same_set = oracle.len() == lib.len() && lib.iter().zip(&oracle).all(|((p, _), o)| p == o);
        }
        if gap > 1e-12 || res.certificate.max_gap > 1e-12 || !listed || !same_set {
            bad += 1;
        }
    }
    let ok = bad == 0 && t.elapsed().as_secs_f64() < 60.0;
    verdict(
        5,
        "exact graph NE by cycles",
        ok,
        t,
        format!("max gap {worst:.1e}, {bad} failures, {set_checked} full NE sets matched"),
    );
}

// 6 -------------------------------------------------------------------------

#[test]
fn criterion_06_value_net() {
    let t = Instant::now();
    let mut r = rng(6);
    let eps = 0.25;
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for &(n, ns) in &[(1, 1), (1, 2), (1, 3), (1, 2), (1, 3)] {
        let g = gen::random_tbsg(&mut r, n, ns, 2, 0.5);
        let res = brute_force_value_net(&g, eps, DEFAULT_NET_BUDGET, Exec::default()).unwrap();
        let pi = res.strategy.stationary().unwrap().clone();
        let gap = common::max_gap(&g, &pi, &Weights::Uniform);
        worst = worst.max(gap);
        if !res.certificate.pass || gap > eps + 1e-9 {
            bad += 1;
        }
    }
    let mut planted = 0;
    for _ in 0..20 {
        let n = r.random_range(1..=3);
        let ns = r.random_range(n..=3);
        let gamma = r.random_range(0.3..0.9);
        let g = gen::random_tbsg(&mut r, n, ns, 3, gamma);
        let ne = common::pure_nash(&g, &Weights::Uniform, 1e-12);
        let Some(pi) = ne.first() else {
            bad += 1;
            continue;
        };
        let vals: Vec<Vec<f64>> = (0..n).map(|i| common::values(&g, pi, i)).collect();
        planted += 1;
        if lp_policies_for_values(&g, &vals, 1e-9).unwrap().is_none() {
            bad += 1;
        }
    }
    let ok = bad == 0 && t.elapsed().as_secs_f64() < 120.0;
    verdict(6, "value net and planted LP", ok, t, format!("max gap {worst:.4}, {planted} planted vectors, {bad} failures"));
}

// 7 -------------------------------------------------------------------------

/// Gap of a non-stationary profile, by backward recursion over its steps.
fn ns_gap(g: &GameSpec, ns: &NonStationaryStrategy) -> f64 {
    let gamma = common::gamma(g);
    let nst = g.num_states();
    (0..g.n())
        .map(|i| {
            let mut w = common::values(g, &ns.tail, i);
            let mut b = common::br_values(g, &ns.tail, i);
            for pi in ns.steps.iter().rev() {
                let nw: Vec<f64> = (0..nst)
                    .map(|s| {
                        let (p, rw) = common::row(g, pi, i, s, None);
                        rw + gamma * p.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>()
                    })
                    .collect();
                let nb: Vec<f64> = (0..nst)
                    .map(|s| {
                        let opts: Vec<Option<(usize, usize)>> = if g.controllers[s].contains(&i) {
                            (0..g.actions[i][s].len()).map(|a| Some((i, a))).collect()
                        } else {
                            vec![None]
                        };
                        opts.into_iter()
                            .map(|f| {
                                let (p, rw) = common::row(g, pi, i, s, f);
                                rw + gamma * p.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>()
                            })
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect();
                w = nw;
                b = nb;
            }
            b.iter().zip(&w).map(|(x, y)| x - y).sum::<f64>() / nst as f64
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_07_backward_induction() {
    let t = Instant::now();
    let mut r = rng(7);
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    let want = |eps: f64| (1.0 / (1.0 - 0.5) * (1.0 / ((1.0 - 0.5) * eps)).ln()).ceil() as usize;
    assert_eq!((want(0.1), want(0.01)), (6, 11));
    for _ in 0..20 {
        let n = r.random_range(1..=3);
        let ns = r.random_range(n..=4);
        let g = gen::random_tbsg(&mut r, n, ns, 3, 0.5);
        for eps in [0.1, 0.01] {
            let res = backward_induction(&g, eps).unwrap();
            let SolvedStrategy::NonStationary(nsp) = &res.strategy else {
                bad += 1;
                continue;
            };
            let cert = nonstationary_certify(&g, nsp, eps).unwrap();
            let gap = ns_gap(&g, nsp);
            worst = worst.max(gap / eps);
            if !cert.pass || gap > eps || res.diagnostics.horizon != Some(want(eps)) || nsp.horizon() != want(eps) {
                bad += 1;
            }
        }
    }
    let ok = bad == 0 && t.elapsed().as_secs_f64() < 30.0;
    verdict(7, "backward induction", ok, t, format!("H = 6 and 11, worst gap/eps {worst:.3}, {bad} failures"));
}

// 8 -------------------------------------------------------------------------

fn circuit(nodes: &[&str], kind: GateKind, ins: &[&str]) -> CircuitSpec {
    CircuitSpec {
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        gates: vec![Gate { kind, inputs: ins.iter().map(|s| s.to_string()).collect(), output: "out".into() }],
    }
}

fn med(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(f64::total_cmp);
    v[1]
}

/// Smallest gap over grid points whose output lies outside [lo, hi]; inputs fixed.
fn min_gap_outside(c: &CircuitSpec, inputs: &[f64], lo: f64, hi: f64, with_aux: bool) -> (f64, usize) {
    let params = GadgetParams::new(0.5, 0.25).unwrap();
    let (g, map) = gcircuit_build(c, &params).unwrap();
    let out = map.node_index("out").unwrap();
    let side = if with_aux { 101 } else { 1 };
    let make = |k: usize| {
        let p_out = (k / side) as f64 / 100.0;
        let p_aux = (k % side) as f64 / 100.0;
        let mut nodes = vec![0.5; map.node_names.len()];
        nodes[..inputs.len()].copy_from_slice(inputs);
        nodes[out] = p_out;
        map.profile(&g, &nodes, &vec![p_aux; map.gates.len()])
    };
    let gaps = max_gaps_by(&g, 101 * side, make, &InitialDistribution::OwnState, Exec::default()).unwrap();
    let mut min = f64::INFINITY;
    let mut count = 0;
    for (k, gap) in gaps.into_iter().enumerate() {
        let p_out = (k / side) as f64 / 100.0;
        if p_out < lo - 1e-12 || p_out > hi + 1e-12 {
            count += 1;
            min = min.min(gap);
        }
    }
    (min, count)
}

#[test]
fn criterion_08_gadget_grids() {
    let t = Instant::now();
    let (gamma, eps) = (0.5f64, 0.25f64);
    let l = (4.0 / (1.0 - gamma) * (1.0 / eps).ln()).ceil() as usize;
    let delta = (1.0 - gamma) * gamma.powi(l as i32 + 1) * eps / 8.0;
    let delta_gt = (1.0 - gamma) * gamma.powi(l as i32) * eps * eps / 2.0;
    let params = GadgetParams::new(gamma, eps).unwrap();
    let mut notes = Vec::new();
    let mut ok = l == 12
        && params.l == 12
        && (params.delta - delta).abs() < 1e-15
        && (params.delta_gt - delta_gt).abs() < 1e-15
        && (delta - 1.9073e-6).abs() < 1e-9;

    let eq = circuit(&["in", "out"], GateKind::Eq, &["in"]);
    let (g, _) = gcircuit_build(&eq, &params).unwrap();
    ok &= g.num_states() == 47;
    let mut eq_min = f64::INFINITY;
    for p_in in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (m, cnt) = min_gap_outside(&eq, &[p_in], p_in - eps, p_in + eps, true);
        ok &= cnt > 0 && m > delta;
        eq_min = eq_min.min(m);
    }
    notes.push(format!("eq min gap {eq_min:.3e}"));

    let spots: Vec<(&str, CircuitSpec, Vec<f64>, (f64, f64), bool, f64)> = vec![
        (
            "const",
            circuit(&["out"], GateKind::Const(0.3), &[]),
            vec![],
            (med(0.0, 0.3 - eps, 1.0 - eps), med(1.0, 0.3 + eps, eps)),
            true,
            delta,
        ),
        (
            "mul",
            circuit(&["in", "out"], GateKind::Mul(0.5), &["in"]),
            vec![0.6],
            (med(0.0, 0.5 * 0.6 - eps, 1.0 - eps), med(1.0, 0.5 * 0.6 + eps, eps)),
            true,
            delta,
        ),
        (
            "sum",
            circuit(&["a", "b", "out"], GateKind::Sum, &["a", "b"]),
            vec![0.3, 0.4],
            (med(0.0, 0.7 - eps, 1.0 - eps), (0.7 + eps).min(1.0)),
            true,
            delta,
        ),
        (
            "sub",
            circuit(&["a", "b", "out"], GateKind::Sub, &["a", "b"]),
            vec![0.7, 0.2],
            ((0.5 - eps).max(0.0), med(1.0, 0.5 + eps, eps)),
            true,
            delta,
        ),
        ("gt-high", circuit(&["a", "b", "out"], GateKind::Gt, &["a", "b"]), vec![0.8, 0.2], (1.0 - eps, 1.0), false, delta_gt),
        ("gt-low", circuit(&["a", "b", "out"], GateKind::Gt, &["a", "b"]), vec![0.2, 0.8], (0.0, eps), false, delta_gt),
    ];
    for (name, c, ins, (lo, hi), aux, d) in spots {
        let (m, cnt) = min_gap_outside(&c, &ins, lo, hi, aux);
        ok &= cnt > 0 && m > d;
        notes.push(format!("{name} {m:.3e}"));
    }

    // a point inside every interval is accepted by the assignment checker
    let (g, map) = gcircuit_build(&circuit(&["a", "b", "out"], GateKind::Sum, &["a", "b"]), &params).unwrap();
    let pi = map.profile(&g, &[0.3, 0.4, 0.7], &[0.5]);
    ok &= circuit_assignment(&map, &pi, eps).all_pass;

    ok &= t.elapsed().as_secs_f64() < 300.0;
    verdict(8, "gadget grid soundness", ok, t, notes.join(", "));
}

// 9 -------------------------------------------------------------------------

#[test]
fn criterion_09_hamiltonian() {
    let t = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for edges in [vec![(0, 1), (1, 2), (2, 0)], vec![(0, 1), (1, 2), (2, 3), (3, 0)], vec![(0, 2), (2, 1), (1, 3), (3, 0), (0, 1), (2, 3)]] {
        let n = edges.iter().map(|e| e.0.max(e.1)).max().unwrap() + 1;
        let graph = DirectedGraph::from_edges(n, &edges).unwrap();
        let (g, map) = hamiltonian_game_build(&graph, 0.5).unwrap();
        let cycle: Vec<usize> = {
            let mut c = vec![0];
            while c.len() < n {
                let v = *c.last().unwrap();
                c.push(edges.iter().find(|e| e.0 == v && !c.contains(&e.1)).unwrap().1);
            }
            c
        };
        let pi = map.cycle_strategy(&g, &cycle).unwrap();
        let exact = check_bellman_ne(&g, &pi, 0.0, BellmanMode::Exact).unwrap();
        let gap = common::max_gap(&g, &pi, &Weights::Own);
        let (_, ham) = induced_subgraph(&graph, &map, &pi).unwrap();
        ok &= exact.pass && gap <= 1e-12 && ham;
        notes.push(format!("{n}-vertex gap {gap:.1e}"));
    }
    let graph = DirectedGraph::from_edges(3, &[(0, 1), (1, 0)]).unwrap();
    let (g, _) = hamiltonian_game_build(&graph, 0.5).unwrap();
    let delta = hamiltonian_delta(0.5, 3);
    let want = 0.5f64.powi(8) * 0.5 / ((1.0 - 0.5f64.powi(8)) * (1.0 - 0.5f64.powi(9))) / 2.0;
    let total: usize = (0..g.n())
        .map(|i| g.actions[i].iter().map(|a| a.len().max(1)).product::<usize>())
        .product();
    let found = pure_ne_enumerate(&g, delta, &InitialDistribution::OwnState, DEFAULT_ENUM_BUDGET, Exec::default()).unwrap();
    let oracle_min = common::all_pure(&g)
        .iter()
        .map(|p| common::max_gap(&g, p, &Weights::Own))
        .fold(f64::INFINITY, f64::min);
    ok &= g.num_states() == 69 && total == 1152 && (delta - want).abs() < 1e-15 && found.is_empty() && oracle_min > delta;
    notes.push(format!("non-Hamiltonian: {total} profiles, none within {delta:.3e} (oracle min gap {oracle_min:.3e})"));
    ok &= t.elapsed().as_secs_f64() < 180.0;
    verdict(9, "Hamiltonian round-trip", ok, t, notes.join(", "));
}

// 10 ------------------------------------------------------------------------

fn oracle_mixing(p: &[Vec<f64>], cap: usize) -> Option<usize> {
    let ns = p.len();
    let mut big = p.to_vec();
    for _ in 0..12 {
        big = common::mat_mul(&big, &big);
    }
    let lam = big[0].clone();
    let mut pt: Vec<Vec<f64>> = (0..ns).map(|s| (0..ns).map(|u| if s == u { 1.0 } else { 0.0 }).collect()).collect();
    for t in 1..=cap {
        pt = common::mat_mul(&pt, p);
        let worst = pt
            .iter()
            .map(|row| row.iter().zip(&lam).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= 0.5 {
            return Some(t);
        }
    }
    None
}

#[test]
fn criterion_10_reductions() {
    let t = Instant::now();
    let mut r = rng(10);
    let (mut abs_err, mut disc_err, mut copy_err, mut avg_slack): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, f64::INFINITY);
    let mut bad = 0;
    for _ in 0..200 {
        let n = r.random_range(1..=3);
        let ns = r.random_range(n..=4);
        let gamma = r.random_range(0.3..0.9);
        let g = gen::random_simsg(&mut r, n, ns, 3, gamma);
        let pi = gen::random_strategy(&mut r, &g);
        let q = positive_dist(&mut r, ns);
        let base: Vec<f64> = (0..n).map(|i| common::utility(&g, &pi, i, &Weights::Dist(q.clone()))).collect();

        let (ga, amap) = discounted_to_absorbing(&g, 1.0).unwrap();
        let va = absorbing_value(&ga, &amap.extend_strategy(&pi), &InitialDistribution::Dist(amap.extend_dist(&q))).unwrap();
        for i in 0..n {
            abs_err = abs_err.max((va.utilities[i] - base[i]).abs());
        }
        let gp = r.random_range(gamma..1.0);
        let (gd, dmap) = discounted_to_absorbing(&g, gp).unwrap();
        let pd = dmap.extend_strategy(&pi);
        let vd = value_function(&gd, &pd, &InitialDistribution::Dist(dmap.extend_dist(&q))).unwrap();
        for i in 0..n {
            disc_err = disc_err.max((vd.utilities[i] - base[i]).abs());
            disc_err = disc_err.max((common::utility(&gd, &pd, i, &Weights::Dist(dmap.extend_dist(&q))) - base[i]).abs());
        }

        let (go, cmap) = simsg_to_ossg(&g).unwrap();
        let orig = bellman_errors(&g, &pi, None).unwrap();
        let back = cmap.report_from_copy(&bellman_errors(&go, &cmap.strategy_to_copy(&g, &pi), None).unwrap());
        let mut sorted = orig.entries.clone();
        sorted.sort_by_key(|e| (e.player, e.state, e.action));
        if sorted.len() != back.entries.len() {
            bad += 1;
        }
        for (a, b) in sorted.iter().zip(&back.entries) {
            if (a.player, a.state, a.action) != (b.player, b.state, b.action) {
                bad += 1;
            }
            copy_err = copy_err.max((a.psi - b.psi).abs()).max((a.upsilon - b.upsilon).abs());
        }
        copy_err = copy_err.max((orig.max_upsilon - back.max_upsilon).abs());
        for e in &orig.entries {
            let v = common::values(&g, &pi, e.player);
            let (p, rw) = common::row(&g, &pi, e.player, e.state, Some((e.player, e.action)));
            let psi = rw + gamma * p.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() - v[e.state];
            if (psi - e.psi).abs() > 1e-9 {
                bad += 1;
            }
        }

        let gu = gen::random_unichain(&mut r, n, ns, 3);
        let pu = gen::random_strategy(&mut r, &gu);
        let rows: Vec<(Vec<f64>, f64)> = (0..ns).map(|s| common::row(&gu, &pu, 0, s, None)).collect();
        let pm: Vec<Vec<f64>> = rows.iter().map(|x| x.0.clone()).collect();
        let ch = stochgame::induced_chain(&gu, &pu).unwrap();
        let lib_mix = mixing_time(&ch.p, 1000).unwrap();
        let tm = oracle_mixing(&pm, 1000);
        if lib_mix != tm || tm.is_none() {
            bad += 1;
            continue;
        }
        let tmix = tm.unwrap() as f64;
        let eps = r.random_range(0.05..0.5);
        let (gdisc, adv) = average_to_discounted(&gu, tmix, eps).unwrap();
        let avg = average_reward_value(&gu, &pu).unwrap();
        let lam = {
            let mut big = pm.clone();
            for _ in 0..12 {
                big = common::mat_mul(&big, &big);
            }
            big[0].clone()
        };
        for i in 0..n {
            let gain: f64 = (0..ns).map(|s| lam[s] * common::row(&gu, &pu, i, s, None).1).sum();
            if (gain - avg.utilities[i]).abs() > 1e-9 {
                bad += 1;
            }
            let v = common::values(&gdisc, &pu, i);
            let bound = 3.0 * (1.0 - adv.gamma) * tmix;
            for vs in v {
                let d = (gain - (1.0 - adv.gamma) * vs).abs();
                avg_slack = avg_slack.min(bound - d);
                if d > bound {
                    bad += 1;
                }
            }
        }
    }
    let ok = bad == 0 && abs_err <= 1e-9 && disc_err <= 1e-9 && copy_err <= 1e-12 && t.elapsed().as_secs_f64() < 60.0;
    verdict(
        10,
        "reduction value equality",
        ok,
        t,
        format!("absorbing {abs_err:.1e}, rediscount {disc_err:.1e}, copies {copy_err:.1e}, avg min slack {avg_slack:.3e}, {bad} failures"),
    );
}

// 11 ------------------------------------------------------------------------

#[test]
fn criterion_11_brouwer() {
    let t = Instant::now();
    let mut r = rng(11);
    let (mut fixed, mut moved, mut bad) = (0, 0, 0);
    let mut worst_lip: f64 = 0.0;
    for k in 0..60 {
        let (g, mode, w) = if k % 2 == 0 {
            let n = r.random_range(1..=3);
            (gen::random_ossg(&mut r, n, 3, 0.5), BrouwerMode::ValueMap, Weights::Own)
        } else {
            let n = r.random_range(1..=2);
            let ns = r.random_range(1..=3);
            (gen::random_simsg(&mut r, n, ns, 2, 0.5), BrouwerMode::BellmanMap, Weights::Uniform)
        };
        for pi in common::all_pure(&g) {
            let gap = common::max_gap(&g, &pi, &w);
            let res = pi.dist_inf(&brouwer_map(&g, &pi, mode).unwrap());
            if gap <= 1e-12 {
                fixed += 1;
                if res > 1e-10 {
                    bad += 1;
                }
            } else if gap > 1e-6 {
                moved += 1;
                if res <= 1e-10 {
                    bad += 1;
                }
            }
        }
    }
    for k in 0..200 {
        let gamma = r.random_range(0.3..0.8);
        let (g, mode, w) = if k % 2 == 0 {
            let n = r.random_range(1..=4);
            (gen::random_ossg(&mut r, n, 3, gamma), BrouwerMode::ValueMap, Weights::Own)
        } else {
            let n = r.random_range(1..=3);
            let ns = r.random_range(1..=3);
            (gen::random_simsg(&mut r, n, ns, 3, gamma), BrouwerMode::BellmanMap, Weights::Uniform)
        };
        let a = gen::random_strategy(&mut r, &g);
        let b = if k % 4 < 2 {
            gen::random_strategy(&mut r, &g)
        } else {
            let noise = gen::random_strategy(&mut r, &g);
            let mut p = a.clone();
            let th = r.random_range(0.0..0.01);
            for i in 0..g.n() {
                p = mix_strategy(&g, &p, i, &noise.probs[i], th).unwrap();
            }
            p
        };
        let fa = brouwer_map(&g, &a, mode).unwrap();
        let fb = brouwer_map(&g, &b, mode).unwrap();
        let d = a.dist_inf(&b);
        let lip = lipschitz_bound(&g, mode).unwrap();
        if d > 0.0 {
            worst_lip = worst_lip.max(fa.dist_inf(&fb) / d / lip);
        }
        if fa.dist_inf(&fb) > lip * d + 1e-12 {
            bad += 1;
        }
        let eps = implied_epsilon(&g, mode, a.dist_inf(&fa)).unwrap();
        if common::max_gap(&g, &a, &w) > eps + 1e-9 {
            bad += 1;
        }
    }
    let ok = bad == 0 && fixed > 0 && moved > 0 && t.elapsed().as_secs_f64() < 60.0;
    verdict(
        11,
        "Brouwer fixed points and Lipschitz bounds",
        ok,
        t,
        format!("{fixed} NE fixed, {moved} non-NE moved, worst ratio to bound {worst_lip:.3}, {bad} failures"),
    );
}

#[test]
fn certify_deviation_agrees_with_oracle_on_counterexample() {
    let g = three_state_tbsg();
    let pi = Strategy::uniform(&g);
    let c = certify_deviation(&g, &pi, &InitialDistribution::Uniform, 1.0).unwrap();
    assert!((c.max_gap - common::max_gap(&g, &pi, &Weights::Uniform)).abs() < 1e-10);
}
