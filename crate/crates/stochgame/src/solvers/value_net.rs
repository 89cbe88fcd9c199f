//! Value-net enumeration with a policy LP per candidate value vector.

use std::time::Instant;

use crate::certify::certify_deviation;
use crate::error::{Result, SgError};
use crate::game::{GameSpec, InitialDistribution, Strategy};
use crate::par::{find_first, Exec};

use super::lp::{lp_feasibility, LpOutcome, LpProblem, RowKind};
use super::{Diagnostics, SolveResult, SolvedStrategy};

pub const DEFAULT_NET_BUDGET: u64 = 10_000_000;

/// Grid of candidate values for every (player, state) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueNet {
    pub eps_prime: f64,
    pub eps2: f64,
    /// Lowest grid value.
    pub lo: f64,
    /// Number of levels per coordinate: {lo, lo + eps', ...} up to the top of the range.
    pub levels: usize,
    /// Coordinates, ordered player-major.
    pub dims: usize,
}

impl ValueNet {
    /// Net over [0, ceil(1/(1-gamma))], enough for rewards in [0, 1].
    pub fn new(gamma: f64, eps: f64, dims: usize) -> Self {
        Self::with_range(gamma, eps, dims, 0.0, (1.0 / (1.0 - gamma)).ceil())
    }

    pub fn with_range(gamma: f64, eps: f64, dims: usize, lo: f64, hi: f64) -> Self {
        let eps_prime = eps * (1.0 - gamma).powi(2) / (1.0 + gamma);
        let levels = (((hi - lo) / eps_prime) - 1e-9).ceil().max(0.0) as usize + 1;
        ValueNet { eps_prime, eps2: eps_prime * (1.0 + gamma), lo, levels, dims }
    }

    /// Net covering every value the game can produce.
    pub fn for_game(g: &GameSpec, eps: f64) -> Result<Self> {
        let gamma = g.gamma()?;
        let all = g.rewards.iter().flatten().flatten().copied();
        let (rmin, rmax) = all.fold((0.0f64, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
        let dims = g.n() * g.num_states();
        if rmin == 0.0 && rmax <= 1.0 {
            return Ok(Self::new(gamma, eps, dims));
        }
        Ok(Self::with_range(gamma, eps, dims, rmin / (1.0 - gamma), rmax / (1.0 - gamma)))
    }

    /// |N| as a float (may exceed u64).
    pub fn size(&self) -> f64 {
        (self.levels as f64).powi(self.dims as i32)
    }

    /// Candidate number `k` in lexicographic order, first coordinate most significant.
    pub fn decode(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims];
        for d in (0..self.dims).rev() {
            out[d] = self.lo + (k % self.levels) as f64 * self.eps_prime;
            k /= self.levels;
        }
        out
    }
}

/// Per-state backups Q_j(s, a) = r_j + gamma p . V_j for the owner's actions.
fn backups(g: &GameSpec, gamma: f64, s: usize, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..g.joint_count(s))
        .map(|a| {
            let p = &g.transitions[s][a];
            (0..g.n())
                .map(|j| g.rewards[j][s][a] + gamma * p.iter().zip(&values[j]).map(|(x, v)| x * v).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Policy at state `s` meeting the best-response and evaluation rows, if any.
fn state_policy(g: &GameSpec, gamma: f64, s: usize, values: &[Vec<f64>], eps2: f64) -> Result<Option<Vec<f64>>> {
    let owner = g.controllers[s][0];
    let q = backups(g, gamma, s, values);
    let m = q.len();
    // best-response rows involve values only
    if q.iter().any(|qa| values[owner][s] < qa[owner] - eps2) {
        return Ok(None);
    }
    for j in 0..g.n() {
        let lo = q.iter().map(|qa| qa[j]).fold(f64::INFINITY, f64::min);
        let hi = q.iter().map(|qa| qa[j]).fold(f64::NEG_INFINITY, f64::max);
        if values[j][s] > hi + eps2 || values[j][s] < lo - eps2 {
            return Ok(None);
        }
    }
    if m == 1 {
        return Ok(Some(vec![1.0]));
    }
    let mut lp = LpProblem::nonneg(m);
    lp.push(vec![1.0; m], RowKind::Eq, 1.0);
    for j in 0..g.n() {
        let c: Vec<f64> = q.iter().map(|qa| qa[j]).collect();
        lp.push(c.clone(), RowKind::Le, values[j][s] + eps2);
        lp.push(c, RowKind::Ge, values[j][s] - eps2);
    }
    match lp_feasibility(&lp)? {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Feasible(x) => {
            let x: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
            let tot: f64 = x.iter().sum();
            Ok(Some(x.into_iter().map(|v| v / tot).collect()))
        }
    }
}

/// Policies consistent with the fixed values `values[i][s]` up to slack eps2.
pub fn lp_policies_for_values(g: &GameSpec, values: &[Vec<f64>], eps2: f64) -> Result<Option<Strategy>> {
    if !g.controllers.iter().all(|c| c.len() == 1) {
        return Err(SgError::NotTurnBased);
    }
    let gamma = g.gamma()?;
    if values.len() != g.n() || values.iter().any(|v| v.len() != g.num_states()) {
        return Err(SgError::DimensionMismatch("value vector shape".into()));
    }
    let mut pi = Strategy::uniform(g);
    for s in 0..g.num_states() {
        match state_policy(g, gamma, s, values, eps2)? {
            None => return Ok(None),
            Some(p) => pi.probs[g.controllers[s][0]][s] = p,
        }
    }
    Ok(Some(pi))
}

pub fn brute_force_value_net(g: &GameSpec, eps: f64, budget: u64, exec: Exec) -> Result<SolveResult> {
    if !g.controllers.iter().all(|c| c.len() == 1) {
        return Err(SgError::NotTurnBased);
    }
    let start = Instant::now();
    let ns = g.num_states();
    let net = ValueNet::for_game(g, eps)?;
    let size = net.size();
    if size > budget as f64 {
        return Err(SgError::BudgetExceeded { required: size, budget });
    }
    let found = find_first(exec, size as usize, |k| {
        let flat = net.decode(k);
        let values: Vec<Vec<f64>> = flat.chunks(ns).map(|c| c.to_vec()).collect();
        lp_policies_for_values(g, &values, net.eps2).ok().flatten()
    });
    let Some((k, pi)) = found else {
        return Err(SgError::NoFeasibleCandidate);
    };
    let certificate = certify_deviation(g, &pi, &InitialDistribution::Uniform, eps)?;
    Ok(SolveResult {
        strategy: SolvedStrategy::Stationary(pi),
        certificate,
        iterations: k + 1,
        wall_time: start.elapsed().as_secs_f64(),
        method: "lp-net",
        diagnostics: Diagnostics { net_size: Some(size), ..Default::default() },
    })
}
