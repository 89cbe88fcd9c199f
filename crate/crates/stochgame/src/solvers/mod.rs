//! Equilibrium solvers and the brute-force pure-strategy oracle.

pub mod backward;
pub mod brouwer;
pub mod cycles;
pub mod enumerate;
pub mod lp;
pub mod strategy_iter;
pub mod value_net;

use serde::Serialize;

use crate::certify::NeCertificate;
use crate::game::{NonStationaryStrategy, Strategy};

pub use backward::{backward_induction, horizon};
pub use brouwer::{brouwer_fixed_point_solve, brouwer_map, implied_epsilon, lipschitz_bound, BrouwerMode};
pub use cycles::{cycle_ne_graph, CycleSign};
pub use enumerate::{pure_ne_enumerate, DEFAULT_ENUM_BUDGET};
pub use lp::{lp_feasibility, LpOutcome, LpProblem, RowKind};
pub use strategy_iter::{iteration_bound, potential, strategy_iteration_locreward};
pub use value_net::{brute_force_value_net, lp_policies_for_values, ValueNet, DEFAULT_NET_BUDGET};

#[derive(Clone, Debug, PartialEq)]
pub enum SolvedStrategy {
    Stationary(Strategy),
    NonStationary(NonStationaryStrategy),
}

impl SolvedStrategy {
    pub fn stationary(&self) -> Option<&Strategy> {
        match self {
            SolvedStrategy::Stationary(s) => Some(s),
            SolvedStrategy::NonStationary(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub potential_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub implied_epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub strategy: SolvedStrategy,
    pub certificate: NeCertificate,
    pub iterations: usize,
    pub wall_time: f64,
    pub method: &'static str,
    pub diagnostics: Diagnostics,
}
