//! Discounted stochastic games: evaluation, Nash certification, equilibrium
//! solvers and reductions between game classes.

pub mod certify;
pub mod error;
pub mod eval;
pub mod game;
pub mod gen;
pub mod io;
pub mod par;
pub mod reductions;
pub mod solvers;

pub use error::{Result, SgError};
pub use game::{
    classify_game, induced_chain, mix_strategy, validate_game, DiscountMode, GameBuilder, GameClass, GameSpec,
    InitialDistribution, NonStationaryStrategy, RewardSign, Strategy,
};
