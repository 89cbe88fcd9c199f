//! Exhaustive pure-strategy scan, used as a test oracle.

use crate::certify::{certify_deviation, NeCertificate};
use crate::error::{Result, SgError};
use crate::game::{GameSpec, InitialDistribution, Strategy};
use crate::par::{map_indexed, Exec};

pub const DEFAULT_ENUM_BUDGET: u64 = 1_000_000;

/// Controlled (player, state) slots in lexicographic order.
fn slots(g: &GameSpec) -> Vec<(usize, usize)> {
    (0..g.n())
        .flat_map(|i| (0..g.num_states()).map(move |s| (i, s)))
        .filter(|&(i, s)| !g.actions[i][s].is_empty())
        .collect()
}

/// Number of pure strategies.
pub fn pure_count(g: &GameSpec) -> f64 {
    slots(g).iter().map(|&(i, s)| g.actions[i][s].len() as f64).product()
}

/// Pure strategy number `k`, first slot most significant.
pub fn pure_strategy(g: &GameSpec, mut k: usize) -> Strategy {
    let sl = slots(g);
    let mut choice = vec![vec![0usize; g.num_states()]; g.n()];
    for &(i, s) in sl.iter().rev() {
        let m = g.actions[i][s].len();
        choice[i][s] = k % m;
        k /= m;
    }
    Strategy::pure_with(g, |i, s| choice[i][s])
}

/// All pure strategies with deviation gap at most `delta`, in lexicographic order.
pub fn pure_ne_enumerate(
    g: &GameSpec,
    delta: f64,
    q: &InitialDistribution,
    budget: u64,
    exec: Exec,
) -> Result<Vec<(Strategy, NeCertificate)>> {
    let count = pure_count(g);
    if count > budget as f64 {
        return Err(SgError::BudgetExceeded { required: count, budget });
    }
    let found = map_indexed(exec, count as usize, |k| {
        let pi = pure_strategy(g, k);
        certify_deviation(g, &pi, q, delta).map(|c| (pi, c))
    });
    let mut out = Vec::new();
    for r in found {
        let (pi, c) = r?;
        if c.max_gap <= delta {
            out.push((pi, c));
        }
    }
    Ok(out)
}
