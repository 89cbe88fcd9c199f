//! Nash certificates: deviation gaps, Bellman conditions, pseudo-linearity probes.

use serde::Serialize;

use crate::error::{Result, SgError};
use crate::eval::{backup, best_response_choice, deviation_row, value_matrix};
use crate::game::{mix_strategy, GameSpec, InitialDistribution, NonStationaryStrategy, Strategy};
use crate::par::{map_indexed, Exec};

/// Slack added to every epsilon comparison.
pub const CERT_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertMode {
    DeviationGap,
    BellmanNecessary,
    BellmanSufficient,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellmanMode {
    Exact,
    Necessary,
    Sufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub player: usize,
    pub state: usize,
    pub action: usize,
    /// Time step for non-stationary certificates (1-based).
    pub step: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeCertificate {
    pub mode: CertMode,
    pub epsilon: f64,
    /// Worst violation per player (deviation gap, or Bellman shortfall).
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
}

/// Per-player gap u_i(BR_i, pi_-i) - u_i(pi), plus the state and action of
/// the largest Bellman error for the worst player.
fn gaps_and_witness(g: &GameSpec, pi: &Strategy, q: &InitialDistribution) -> Result<(Vec<f64>, Option<Witness>)> {
    pi.validate(g)?;
    let gamma = g.gamma()?;
    let v = value_matrix(g, pi)?;
    let mut gaps = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let w = q.weights(g, i)?;
        let base: f64 = w.iter().zip(v.column(i).iter()).map(|(a, b)| a * b).sum();
        let own = g.controlled_states(i);
        if own.iter().all(|&s| g.actions[i][s].len() == 1) {
            gaps.push(0.0);
            continue;
        }
        let (_, vbr) = best_response_choice(g, i, pi)?;
        let u: f64 = w.iter().zip(&vbr).map(|(a, b)| a * b).sum();
        gaps.push((u - base).max(0.0));
    }
    let worst = (0..g.n()).max_by(|&a, &b| gaps[a].total_cmp(&gaps[b]));
    let witness = worst.filter(|&i| gaps[i] > 0.0).map(|i| {
        let vi: Vec<f64> = v.column(i).iter().copied().collect();
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for s in g.controlled_states(i) {
            for a in 0..g.actions[i][s].len() {
                let psi = backup(g, pi, i, s, a, gamma, &vi) - vi[s];
                if psi > best.0 {
                    best = (psi, s, a);
                }
            }
        }
        Witness { player: i, state: best.1, action: best.2, step: None }
    });
    Ok((gaps, witness))
}

/// Exact deviation gap; the returned certificate's epsilon is the max gap.
pub fn deviation_gap(g: &GameSpec, pi: &Strategy, q: &InitialDistribution) -> Result<NeCertificate> {
    let (gaps, witness) = gaps_and_witness(g, pi, q)?;
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(NeCertificate { mode: CertMode::DeviationGap, epsilon: max_gap, gaps, max_gap, pass: true, witness })
}

/// Deviation-gap certificate tested against a given epsilon.
pub fn certify_deviation(g: &GameSpec, pi: &Strategy, q: &InitialDistribution, eps: f64) -> Result<NeCertificate> {
    let (gaps, witness) = gaps_and_witness(g, pi, q)?;
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let pass = max_gap <= eps + CERT_SLACK;
    Ok(NeCertificate {
        mode: CertMode::DeviationGap,
        epsilon: eps,
        gaps,
        max_gap,
        pass,
        witness: if pass { None } else { witness },
    })
}

/// Max deviation gap of `make(k)` for k in 0..n, in index order.
pub fn max_gaps_by<F>(g: &GameSpec, n: usize, make: F, q: &InitialDistribution, exec: Exec) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Strategy + Sync + Send,
{
    map_indexed(exec, n, |k| gaps_and_witness(g, &make(k), q).map(|(gaps, _)| gaps.into_iter().fold(0.0, f64::max)))
        .into_iter()
        .collect()
}

pub fn check_bellman_ne(g: &GameSpec, pi: &Strategy, eps: f64, mode: BellmanMode) -> Result<NeCertificate> {
    pi.validate(g)?;
    let gamma = g.gamma()?;
    let slack = match mode {
        BellmanMode::Exact => 0.0,
        BellmanMode::Necessary => g.num_states() as f64 * eps,
        BellmanMode::Sufficient => (1.0 - gamma) * eps,
    } + CERT_SLACK;
    let v = value_matrix(g, pi)?;
    let mut gaps = vec![0.0f64; g.n()];
    let mut worst: Option<(f64, Witness)> = None;
    for (i, gap) in gaps.iter_mut().enumerate() {
        let vi: Vec<f64> = v.column(i).iter().copied().collect();
        for s in g.controlled_states(i) {
            for a in 0..g.actions[i][s].len() {
                let short = backup(g, pi, i, s, a, gamma, &vi) - vi[s];
                if short > *gap {
                    *gap = short;
                }
                if worst.as_ref().is_none_or(|w| short > w.0) {
                    worst = Some((short, Witness { player: i, state: s, action: a, step: None }));
                }
            }
        }
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let pass = max_gap <= slack;
    Ok(NeCertificate {
        mode: match mode {
            BellmanMode::Exact => CertMode::Exact,
            BellmanMode::Necessary => CertMode::BellmanNecessary,
            BellmanMode::Sufficient => CertMode::BellmanSufficient,
        },
        epsilon: eps,
        gaps,
        max_gap,
        pass,
        witness: if pass { None } else { worst.map(|w| w.1) },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub theta: f64,
    pub utility: f64,
    pub ratio: f64,
    pub within_bounds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub u_a: f64,
    pub u_b: f64,
    pub points: Vec<ProbePoint>,
    pub all_within_bounds: bool,
    pub monotone: bool,
}

/// Utility of player i along theta*pi_b + (1-theta)*pi_a with others fixed.
pub fn pseudo_linearity_probe(
    g: &GameSpec,
    i: usize,
    pi_a: &[Vec<f64>],
    pi_b: &[Vec<f64>],
    context: &Strategy,
    thetas: &[f64],
    q: &InitialDistribution,
    tol: f64,
) -> Result<ProbeReport> {
    let gamma = g.gamma()?;
    let u_at = |theta: f64| -> Result<f64> {
        let base = mix_strategy(g, context, i, pi_a, 1.0)?;
        let s = mix_strategy(g, &base, i, pi_b, theta)?;
        s.validate(g)?;
        crate::eval::utility(g, &s, i, q)
    };
    let u_a = u_at(0.0)?;
    let u_b = u_at(1.0)?;
    let denom = u_b - u_a;
    if denom.abs() <= 1e-8 {
        return Err(SgError::DegenerateSegment(denom.abs()));
    }
    let mut grid: Vec<f64> = thetas.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(grid.len());
    for &theta in &grid {
        let u = u_at(theta)?;
        let ratio = (u - u_a) / denom;
        let lo = (1.0 - gamma) * theta;
        let hi = theta / (1.0 - gamma);
        let within_bounds = ratio >= lo - tol && ratio <= hi + tol;
        points.push(ProbePoint { theta, utility: u, ratio, within_bounds });
    }
    let mut seq = vec![u_a];
    seq.extend(points.iter().map(|p| p.utility));
    seq.push(u_b);
    let monotone = if denom > 0.0 {
        seq.windows(2).all(|w| w[1] >= w[0] - tol)
    } else {
        seq.windows(2).all(|w| w[1] <= w[0] + tol)
    };
    let all_within_bounds = points.iter().all(|p| p.within_bounds);
    Ok(ProbeReport { u_a, u_b, points, all_within_bounds, monotone })
}

/// Finite-horizon optimality of the first H steps plus the tail bound.
pub fn nonstationary_certify(g: &GameSpec, ns: &NonStationaryStrategy, eps: f64) -> Result<NeCertificate> {
    let gamma = g.gamma()?;
    let h = ns.horizon();
    let tail = gamma.powi(h as i32) / (1.0 - gamma);
    if tail > eps / 2.0 {
        return Err(SgError::HorizonTooShort { tail, half_eps: eps / 2.0 });
    }
    for st in &ns.steps {
        st.validate(g)?;
    }
    ns.tail.validate(g)?;
    let n = g.n();
    let nst = g.num_states();
    // w[i][s] = value-to-go from step h+1 on, truncated at H
    let mut w = vec![vec![0.0; nst]; n];
    let mut gaps = vec![0.0f64; n];
    let mut witness: Option<(f64, Witness)> = None;
    for step in (0..h).rev() {
        let pi = &ns.steps[step];
        let mut next = vec![vec![0.0; nst]; n];
        for s in 0..nst {
            let (row, r) = g.state_mix(s, &|j, b| pi.probs[j][s][b]);
            for i in 0..n {
                next[i][s] = r[i] + gamma * row.iter().zip(&w[i]).map(|(p, v)| p * v).sum::<f64>();
            }
        }
        for i in 0..n {
            for s in g.controlled_states(i) {
                for a in 0..g.actions[i][s].len() {
                    let (row, r) = deviation_row(g, pi, i, s, a);
                    let b = r[i] + gamma * row.iter().zip(&w[i]).map(|(p, v)| p * v).sum::<f64>();
                    let short = b - next[i][s];
                    if short > gaps[i] {
                        gaps[i] = short;
                    }
                    if short > CERT_SLACK && witness.as_ref().is_none_or(|x| short > x.0) {
                        witness = Some((
                            short,
                            Witness { player: i, state: s, action: a, step: Some(step + 1) },
                        ));
                    }
                }
            }
        }
        w = next;
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let pass = max_gap <= CERT_SLACK;
    Ok(NeCertificate {
        mode: CertMode::Exact,
        epsilon: eps,
        gaps,
        max_gap,
        pass,
        witness: witness.map(|x| x.1),
    })
}
