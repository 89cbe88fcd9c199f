use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use stochgame::certify::{certify_deviation, check_bellman_ne, nonstationary_certify, BellmanMode};
use stochgame::eval::{absorbing_value, average_reward_value, bellman_errors, value_function};
use stochgame::io;
use stochgame::par::Exec;
use stochgame::reductions::{
    average_to_discounted, discounted_to_absorbing, gcircuit_build, hamiltonian_game_build, simsg_to_ossg,
    GadgetParams,
};
use stochgame::solvers::{
    backward_induction, brouwer_fixed_point_solve, brute_force_value_net, cycle_ne_graph, pure_ne_enumerate,
    strategy_iteration_locreward, BrouwerMode, SolveResult, SolvedStrategy, DEFAULT_ENUM_BUDGET, DEFAULT_NET_BUDGET,
};
use stochgame::{classify_game, gen, validate_game, DiscountMode, GameSpec, InitialDistribution, RewardSign, SgError};

#[derive(Parser, Debug)]
#[command(name = "sg", version, about = "Stochastic-game equilibrium toolkit")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check a game file against the model invariants.
    Validate { game: PathBuf },
    /// Report structural class flags.
    Classify { game: PathBuf },
    /// Evaluate a strategy: values, utilities and Bellman errors.
    Eval {
        game: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long, value_enum, default_value_t = Utility::Uniform)]
        utility: Utility,
    },
    /// Compute an (approximate) equilibrium.
    #[command(allow_negative_numbers = true)]
    Solve {
        game: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_parser = positive, default_value_t = 0.1)]
        eps: f64,
        /// Candidate budget for lp-net and enumerate.
        #[arg(long)]
        budget: Option<u64>,
        /// Damping for the Brouwer iterations.
        #[arg(long, value_parser = unit, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 20000)]
        max_iters: usize,
        #[arg(long, value_parser = positive, default_value_t = 1e-9)]
        target_residual: f64,
        #[arg(long)]
        sequential: bool,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Certify a strategy as an approximate equilibrium.
    #[command(allow_negative_numbers = true)]
    Certify {
        game: PathBuf,
        strategy: PathBuf,
        #[arg(long, value_parser = non_negative)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Deviation)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Utility::Uniform)]
        utility: Utility,
    },
    /// Apply a game transformation.
    #[command(allow_negative_numbers = true)]
    Reduce {
        game: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(long)]
        gamma_prime: Option<f64>,
        #[arg(long)]
        tmix: Option<f64>,
        #[arg(long, value_parser = positive)]
        eps: Option<f64>,
    },
    /// Compile a generalized circuit into a turn-based game.
    #[command(allow_negative_numbers = true)]
    Gadget {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_parser = unit)]
        gamma: f64,
        #[arg(long, value_parser = unit)]
        eps: f64,
    },
    /// Build the Hamiltonian-cycle game of a directed graph.
    #[command(allow_negative_numbers = true)]
    Ham {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = unit, default_value_t = 0.5)]
        gamma: f64,
    },
    /// Generate a random test instance.
    #[command(allow_negative_numbers = true)]
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        players: usize,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, value_parser = unit, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Bi,
    LpNet,
    StrategyIter,
    Cycle,
    BrouwerValue,
    BrouwerBellman,
    Enumerate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Deviation,
    Exact,
    Necessary,
    Sufficient,
    Nonstationary,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Utility {
    Uniform,
    Own,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Ossg,
    Absorbing,
    Discounted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    Simsg,
    Tbsg,
    Ossg,
    Otbsg,
    LocrewardPos,
    LocrewardNeg,
    GraphPos,
    GraphNeg,
    Unichain,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string()).and_then(|x| {
        if x.is_finite() {
            Ok(x)
        } else {
            Err("must be finite".into())
        }
    })
}

fn positive(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| if x > 0.0 { Ok(x) } else { Err(format!("{x} must be > 0")) })
}

fn non_negative(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| if x >= 0.0 { Ok(x) } else { Err(format!("{x} must be >= 0")) })
}

fn unit(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| if x > 0.0 && x < 1.0 { Ok(x) } else { Err(format!("{x} must lie in (0, 1)")) })
}

/// Outcome of a command: usage/input problems exit 2, negative results exit 1.
enum Failure {
    Usage(String),
    Outcome(String),
}

impl From<SgError> for Failure {
    fn from(e: SgError) -> Self {
        match e {
            SgError::NonConvergent
            | SgError::NoFeasibleCandidate
            | SgError::BudgetExceeded { .. }
            | SgError::SingularSystem
            | SgError::NotUnichain
            | SgError::HorizonTooShort { .. }
            | SgError::DegenerateSegment(_)
            | SgError::Lp(_) => Failure::Outcome(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Run = Result<(Value, bool), Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    io::parse_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_game(path: &Path) -> Result<GameSpec, Failure> {
    let g = io::game_from_json(&read_json(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let rep = validate_game(&g);
    if !rep.ok {
        return Err(Failure::Usage(format!("{}: {}", path.display(), SgError::InvalidGame(rep.violations))));
    }
    Ok(g)
}

fn utility_of(u: Utility) -> InitialDistribution {
    match u {
        Utility::Uniform => InitialDistribution::Uniform,
        Utility::Own => InitialDistribution::OwnState,
    }
}

fn solve_report(g: &GameSpec, r: &SolveResult, timing: bool) -> Value {
    let strategy = match &r.strategy {
        SolvedStrategy::Stationary(pi) => io::strategy_to_json(g, pi),
        SolvedStrategy::NonStationary(ns) => io::nonstationary_to_json(g, ns),
    };
    let mut body = json!({
        "method": r.method,
        "iterations": r.iterations,
        "strategy": strategy,
        "certificate": io::certificate_to_json(g, &r.certificate),
        "diagnostics": serde_json::to_value(&r.diagnostics).expect("diagnostics serialize"),
    });
    if timing {
        body["wall_time"] = json!(r.wall_time);
    }
    io::report("solve", body)
}

fn run(cli: Cli) -> Run {
    match cli.cmd {
        Cmd::Validate { game } => {
            let g = io::game_from_json(&read_json(&game)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", game.display())))?;
            let rep = validate_game(&g);
            Ok((io::report("validate", json!({"ok": rep.ok, "violations": rep.violations})), rep.ok))
        }
        Cmd::Classify { game } => {
            let g = read_game(&game)?;
            let class = classify_game(&g)?;
            let body = serde_json::to_value(&class).expect("class serializes");
            Ok((io::report("classify", body), true))
        }
        Cmd::Eval { game, strategy, utility } => {
            let g = read_game(&game)?;
            let pi = io::strategy_from_json(&g, &read_json(&strategy)?)?;
            let q = utility_of(utility);
            let body = match g.discount {
                DiscountMode::Discounted(_) => {
                    let vp = value_function(&g, &pi, &q)?;
                    let mut b = io::values_to_json(&g, &vp);
                    b["bellman"] = io::bellman_to_json(&g, &bellman_errors(&g, &pi, Some(&vp))?);
                    b
                }
                DiscountMode::Absorbing => io::values_to_json(&g, &absorbing_value(&g, &pi, &q)?),
                DiscountMode::AverageReward => io::values_to_json(&g, &average_reward_value(&g, &pi)?),
            };
            Ok((io::report("eval", body), true))
        }
        Cmd::Solve { game, method, eps, budget, eta, max_iters, target_residual, sequential, timing } => {
            let g = read_game(&game)?;
            let exec = if sequential { Exec::Sequential } else { Exec::default() };
            let r = match method {
                Method::Bi => backward_induction(&g, eps)?,
                Method::LpNet => brute_force_value_net(&g, eps, budget.unwrap_or(DEFAULT_NET_BUDGET), exec)?,
                Method::StrategyIter => strategy_iteration_locreward(&g, eps)?,
                Method::Cycle => cycle_ne_graph(&g, classify_game(&g)?.reward_sign.into())?,
                Method::BrouwerValue => {
                    brouwer_fixed_point_solve(&g, BrouwerMode::ValueMap, eta, max_iters, target_residual, None)?
                }
                Method::BrouwerBellman => {
                    brouwer_fixed_point_solve(&g, BrouwerMode::BellmanMap, eta, max_iters, target_residual, None)?
                }
                Method::Enumerate => {
                    let q = if g.own_states().is_ok() { InitialDistribution::OwnState } else { InitialDistribution::Uniform };
                    let found = pure_ne_enumerate(&g, eps, &q, budget.unwrap_or(DEFAULT_ENUM_BUDGET), exec)?;
                    let list: Vec<Value> = found
                        .iter()
                        .map(|(pi, c)| json!({"strategy": io::strategy_to_json(&g, pi), "max_gap": c.max_gap}))
                        .collect();
                    let ok = !list.is_empty();
                    return Ok((io::report("enumerate", json!({"delta": eps, "count": list.len(), "equilibria": list})), ok));
                }
            };
            let pass = r.certificate.pass;
            Ok((solve_report(&g, &r, timing), pass))
        }
        Cmd::Certify { game, strategy, eps, mode, utility } => {
            let g = read_game(&game)?;
            let sv = read_json(&strategy)?;
            let cert = match mode {
                Mode::Nonstationary => nonstationary_certify(&g, &io::nonstationary_from_json(&g, &sv)?, eps)?,
                _ => {
                    let pi = io::strategy_from_json(&g, &sv)?;
                    match mode {
                        Mode::Deviation => certify_deviation(&g, &pi, &utility_of(utility), eps)?,
                        Mode::Exact => check_bellman_ne(&g, &pi, eps, BellmanMode::Exact)?,
                        Mode::Necessary => check_bellman_ne(&g, &pi, eps, BellmanMode::Necessary)?,
                        Mode::Sufficient => check_bellman_ne(&g, &pi, eps, BellmanMode::Sufficient)?,
                        Mode::Nonstationary => unreachable!(),
                    }
                }
            };
            let pass = cert.pass;
            Ok((io::report("certify", io::certificate_to_json(&g, &cert)), pass))
        }
        Cmd::Reduce { game, to, gamma_prime, tmix, eps } => {
            let g = read_game(&game)?;
            let body = match to {
                Target::Ossg => {
                    let (h, map) = simsg_to_ossg(&g)?;
                    let copies: Vec<Value> = map
                        .origin
                        .iter()
                        .enumerate()
                        .map(|(k, &(i, s))| {
                            json!({"copy": h.players[k], "player": g.players[i], "state": g.states[s], "placeholder": map.placeholder[k]})
                        })
                        .collect();
                    json!({"game": io::game_to_json(&h), "copies": copies})
                }
                Target::Absorbing => {
                    let (h, map) = discounted_to_absorbing(&g, gamma_prime.unwrap_or(1.0))?;
                    json!({"game": io::game_to_json(&h), "trap_state": h.states[map.trap], "trap_player": h.players[map.trap_player]})
                }
                Target::Discounted => {
                    let (Some(t), Some(e)) = (tmix, eps) else {
                        return Err(Failure::Usage("--to discounted needs --tmix and --eps".into()));
                    };
                    let (h, advice) = average_to_discounted(&g, t, e)?;
                    json!({"game": io::game_to_json(&h), "advice": serde_json::to_value(advice).expect("advice serializes")})
                }
            };
            Ok((io::report("reduce", body), true))
        }
        Cmd::Gadget { circuit, gamma, eps } => {
            let c = io::circuit_from_json(&read_json(&circuit)?)?;
            let params = GadgetParams::new(gamma, eps)?;
            let (g, map) = gcircuit_build(&c, &params)?;
            let nodes: serde_json::Map<String, Value> = map
                .node_names
                .iter()
                .zip(&map.node_player)
                .map(|(v, &p)| (v.clone(), json!({"player": g.players[p], "a1": "a1"})))
                .collect();
            let body = json!({
                "params": serde_json::to_value(params).expect("params serialize"),
                "nodes": nodes,
                "game": io::game_to_json(&g),
            });
            Ok((io::report("gadget", body), true))
        }
        Cmd::Ham { graph, gamma } => {
            let gr = io::graph_from_json(&read_json(&graph)?)?;
            let (g, map) = hamiltonian_game_build(&gr, gamma)?;
            let vertices: Vec<Value> = (0..map.l)
                .map(|i| json!({"vertex": gr.vertices[i], "long": g.states[map.long[i]], "short": g.states[map.short[i]]}))
                .collect();
            Ok((io::report("ham", json!({"L": map.l, "vertices": vertices, "game": io::game_to_json(&g)})), true))
        }
        Cmd::Gen { kind, players, states, actions, gamma, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = match kind {
                GenKind::Simsg => gen::random_simsg(&mut rng, players, states, actions, gamma),
                GenKind::Tbsg => gen::random_tbsg(&mut rng, players, states, actions, gamma),
                GenKind::Ossg => gen::random_ossg(&mut rng, players, actions, gamma),
                GenKind::Otbsg => gen::random_otbsg(&mut rng, players, actions, gamma),
                GenKind::LocrewardPos => gen::random_locreward(&mut rng, players, actions, gamma, RewardSign::NonNegative),
                GenKind::LocrewardNeg => gen::random_locreward(&mut rng, players, actions, gamma, RewardSign::NonPositive),
                GenKind::GraphPos => gen::random_graph_game(&mut rng, players, actions, gamma, RewardSign::NonNegative),
                GenKind::GraphNeg => gen::random_graph_game(&mut rng, players, actions, gamma, RewardSign::NonPositive),
                GenKind::Unichain => gen::random_unichain(&mut rng, players, states, actions),
            };
            Ok((io::game_to_json(&g), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok((report, ok)) => {
            let text = io::to_pretty(&report);
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, text + "\n") {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    if writeln!(stdout, "{text}").is_err() {
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Outcome(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
