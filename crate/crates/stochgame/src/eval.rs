//! Strategy evaluation, Bellman errors and exact best responses.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, SgError};
use crate::game::{induced_chain_unchecked, DiscountMode, GameSpec, InitialDistribution, Strategy};

const RESIDUAL_TOL: f64 = 1e-10;
const PI_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ValueProfile {
    /// `values[i][s]` = V_i(s).
    pub values: Vec<Vec<f64>>,
    /// u_i = <q_i, V_i>.
    pub utilities: Vec<f64>,
    /// V_i(s_i) when every player controls exactly one state.
    pub own_values: Option<Vec<f64>>,
    pub q: InitialDistribution,
}

impl ValueProfile {
    pub fn from_values(g: &GameSpec, values: Vec<Vec<f64>>, q: &InitialDistribution) -> Result<Self> {
        let mut utilities = Vec::with_capacity(g.n());
        for (i, v) in values.iter().enumerate() {
            let w = q.weights(g, i)?;
            utilities.push(w.iter().zip(v).map(|(a, b)| a * b).sum());
        }
        let own_values = g
            .own_states()
            .ok()
            .map(|own| own.iter().enumerate().map(|(i, &s)| values[i][s]).collect());
        Ok(ValueProfile { values, utilities, own_values, q: q.clone() })
    }
}

/// Solve (I - gamma P) X = R column-wise, checking the residual.
pub(crate) fn discounted_solve(p: &DMatrix<f64>, gamma: f64, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ns = p.nrows();
    let a = DMatrix::identity(ns, ns) - p * gamma;
    linear_solve(&a, rhs)
}

pub(crate) fn linear_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = a.clone().lu();
    let mut x = lu.solve(rhs).ok_or(SgError::SingularSystem)?;
    for _ in 0..2 {
        let res = rhs - a * &x;
        if res.amax() <= RESIDUAL_TOL * 1e-3 {
            break;
        }
        // one step of iterative refinement
        x += lu.solve(&res).ok_or(SgError::SingularSystem)?;
    }
    if !(x.iter().all(|v| v.is_finite()) && (rhs - a * &x).amax() <= RESIDUAL_TOL) {
        return Err(SgError::SingularSystem);
    }
    Ok(x)
}

/// V as an |S| x n matrix (column i is V_i) for a discounted game.
pub fn value_matrix(g: &GameSpec, pi: &Strategy) -> Result<DMatrix<f64>> {
    let gamma = g.gamma()?;
    let ch = induced_chain_unchecked(g, pi);
    discounted_solve(&ch.p, gamma, &ch.r.transpose())
}

fn columns(v: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..v.ncols()).map(|i| v.column(i).iter().copied().collect()).collect()
}

pub fn value_function(g: &GameSpec, pi: &Strategy, q: &InitialDistribution) -> Result<ValueProfile> {
    pi.validate(g)?;
    let v = value_matrix(g, pi)?;
    ValueProfile::from_values(g, columns(&v), q)
}

/// u_i(pi) for one player.
pub fn utility(g: &GameSpec, pi: &Strategy, i: usize, q: &InitialDistribution) -> Result<f64> {
    let v = value_matrix(g, pi)?;
    let w = q.weights(g, i)?;
    Ok(w.iter().zip(v.column(i).iter()).map(|(a, b)| a * b).sum())
}

pub fn absorbing_value(g: &GameSpec, pi: &Strategy, q: &InitialDistribution) -> Result<ValueProfile> {
    if g.discount != DiscountMode::Absorbing {
        return Err(SgError::WrongMode("expected an absorbing game".into()));
    }
    let z = g
        .absorbing_state
        .ok_or_else(|| SgError::WrongMode("absorbing game without absorbing state".into()))?;
    pi.validate(g)?;
    let ns = g.num_states();
    for j in 0..g.joint_count(z) {
        let dist = &g.transitions[z][j];
        if (dist[z] - 1.0).abs() > 1e-12 || (0..g.n()).any(|i| g.rewards[i][z][j] != 0.0) {
            return Err(SgError::WrongMode("absorbing state must self-loop with zero reward".into()));
        }
    }
    let ch = induced_chain_unchecked(g, pi);
    let trans: Vec<usize> = (0..ns).filter(|&s| s != z).collect();
    let m = trans.len();
    let ptt = DMatrix::from_fn(m, m, |a, b| ch.p[(trans[a], trans[b])]);
    if m > 0 {
        let rho = ptt
            .complex_eigenvalues()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if rho >= 1.0 - 1e-9 {
            return Err(SgError::NonConvergent);
        }
    }
    let rt = DMatrix::from_fn(m, g.n(), |a, i| ch.r[(i, trans[a])]);
    let x = if m > 0 { discounted_solve(&ptt, 1.0, &rt)? } else { rt };
    let mut values = vec![vec![0.0; ns]; g.n()];
    for (a, &s) in trans.iter().enumerate() {
        for (i, vi) in values.iter_mut().enumerate() {
            vi[s] = x[(a, i)];
        }
    }
    ValueProfile::from_values(g, values, q)
}

/// Stationary distribution of a unichain P via repeated squaring of the
/// lazy chain (I + P)/2, which has the same stationary law and is aperiodic.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let ns = p.nrows();
    let mut m = (DMatrix::identity(ns, ns) + p) * 0.5;
    for _ in 0..80 {
        let mut m2 = &m * &m;
        for mut row in m2.row_iter_mut() {
            let tot = row.sum();
            row /= tot;
        }
        let diff = (&m2 - &m).amax();
        m = m2;
        if diff <= 1e-15 {
            break;
        }
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(SgError::NotUnichain);
    }
    let mut lam: Vec<f64> = (0..ns).map(|t| m.column(t).sum() / ns as f64).collect();
    for s in 0..ns {
        let dev: f64 = (0..ns).map(|t| (m[(s, t)] - lam[t]).abs()).sum();
        if !(dev <= 1e-8) {
            return Err(SgError::NotUnichain);
        }
    }
    // polish with plain power steps
    for _ in 0..100 {
        let row = DVector::from_vec(lam.clone()).transpose() * p;
        let res: f64 = row.iter().zip(&lam).map(|(a, b)| (a - b).abs()).sum();
        lam = row.iter().copied().collect();
        if res <= 1e-10 {
            break;
        }
    }
    let tot: f64 = lam.iter().sum();
    Ok(lam.into_iter().map(|x| x / tot).collect())
}

pub fn average_reward_value(g: &GameSpec, pi: &Strategy) -> Result<ValueProfile> {
    if g.discount != DiscountMode::AverageReward {
        return Err(SgError::WrongMode("expected an average-reward game".into()));
    }
    pi.validate(g)?;
    let ch = induced_chain_unchecked(g, pi);
    let lam = stationary_distribution(&ch.p)?;
    let ns = g.num_states();
    let values = (0..g.n())
        .map(|i| {
            let avg: f64 = (0..ns).map(|s| lam[s] * ch.r[(i, s)]).sum();
            vec![avg; ns]
        })
        .collect();
    ValueProfile::from_values(g, values, &InitialDistribution::Uniform)
}

/// Transition row and rewards at `s` when player i deviates to the pure action a.
pub fn deviation_row(g: &GameSpec, pi: &Strategy, i: usize, s: usize, a: usize) -> (Vec<f64>, Vec<f64>) {
    g.state_mix(s, &|j, b| {
        if j == i {
            if b == a {
                1.0
            } else {
                0.0
            }
        } else {
            pi.probs[j][s][b]
        }
    })
}

/// One-step backup r_i + gamma p . V_i under the deviation (i, s, a).
pub fn backup(g: &GameSpec, pi: &Strategy, i: usize, s: usize, a: usize, gamma: f64, vi: &[f64]) -> f64 {
    let (row, r) = deviation_row(g, pi, i, s, a);
    r[i] + gamma * row.iter().zip(vi).map(|(p, v)| p * v).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellmanEntry {
    pub player: usize,
    pub state: usize,
    pub action: usize,
    pub psi: f64,
    pub upsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellmanReport {
    pub entries: Vec<BellmanEntry>,
    pub max_upsilon: f64,
}

impl BellmanReport {
    /// Upsilon values of player i at state s, indexed by action.
    pub fn upsilon_at(&self, i: usize, s: usize) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.player == i && e.state == s)
            .map(|e| e.upsilon)
            .collect()
    }
}

pub fn bellman_errors(g: &GameSpec, pi: &Strategy, values: Option<&ValueProfile>) -> Result<BellmanReport> {
    let gamma = g.gamma()?;
    let vals = match values {
        Some(v) => v.values.clone(),
        None => columns(&value_matrix(g, pi)?),
    };
    let mut entries = Vec::new();
    let mut max_upsilon: f64 = 0.0;
    for i in 0..g.n() {
        for s in g.controlled_states(i) {
            for a in 0..g.actions[i][s].len() {
                let psi = backup(g, pi, i, s, a, gamma, &vals[i]) - vals[i][s];
                let upsilon = psi.max(0.0);
                max_upsilon = max_upsilon.max(upsilon);
                entries.push(BellmanEntry { player: i, state: s, action: a, psi, upsilon });
            }
        }
    }
    Ok(BellmanReport { entries, max_upsilon })
}

/// Pure best response of player i against pi_{-i} by policy iteration.
/// Returns i's policy (one distribution per state) and the values under it.
pub fn best_response(
    g: &GameSpec,
    i: usize,
    pi: &Strategy,
    q: &InitialDistribution,
) -> Result<(Vec<Vec<f64>>, ValueProfile)> {
    if i >= g.n() {
        return Err(SgError::PlayerOutOfRange(i));
    }
    pi.validate(g)?;
    let (choice, _) = best_response_choice(g, i, pi)?;
    let mut out = pi.clone();
    for (s, c) in choice.iter().enumerate() {
        if let Some(a) = c {
            out.set_pure(i, s, *a);
        }
    }
    let prof = value_function(g, &out, q)?;
    Ok((out.probs[i].clone(), prof))
}

/// Policy-iteration core: pure choice per controlled state and V_i under it.
pub fn best_response_choice(g: &GameSpec, i: usize, pi: &Strategy) -> Result<(Vec<Option<usize>>, Vec<f64>)> {
    let gamma = g.gamma()?;
    let ns = g.num_states();
    let ch = induced_chain_unchecked(g, pi);
    let own = g.controlled_states(i);
    // cached deviation rows for every (s, a) of player i
    let dev: Vec<Vec<(Vec<f64>, f64)>> = own
        .iter()
        .map(|&s| {
            (0..g.actions[i][s].len())
                .map(|a| {
                    let (row, r) = deviation_row(g, pi, i, s, a);
                    (row, r[i])
                })
                .collect()
        })
        .collect();
    let mut choice = vec![0usize; own.len()];
    let mut p = ch.p.clone();
    let mut r = DMatrix::from_fn(ns, 1, |s, _| ch.r[(i, s)]);
    loop {
        for (k, &s) in own.iter().enumerate() {
            let (row, rv) = &dev[k][choice[k]];
            for t in 0..ns {
                p[(s, t)] = row[t];
            }
            r[(s, 0)] = *rv;
        }
        let v = discounted_solve(&p, gamma, &r)?;
        let vi: Vec<f64> = v.column(0).iter().copied().collect();
        let mut changed = false;
        for (k, _) in own.iter().enumerate() {
            let q: Vec<f64> = dev[k]
                .iter()
                .map(|(row, rv)| rv + gamma * row.iter().zip(&vi).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if best > q[choice[k]] + PI_TOL {
                choice[k] = q.iter().position(|&x| x >= best - PI_TOL).unwrap();
                changed = true;
            }
        }
        if !changed {
            let mut full = vec![None; ns];
            for (k, &s) in own.iter().enumerate() {
                full[s] = Some(choice[k]);
            }
            return Ok((full, vi));
        }
    }
}
