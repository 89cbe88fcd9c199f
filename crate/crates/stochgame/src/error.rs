use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SgError {
    #[error("invalid game: {}", .0.join("; "))]
    InvalidGame(Vec<String>),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("player {0} out of range")]
    PlayerOutOfRange(usize),
    #[error("singular linear system")]
    SingularSystem,
    #[error("transient block is not contracting")]
    NonConvergent,
    #[error("induced chain is not unichain")]
    NotUnichain,
    #[error("game is not turn-based")]
    NotTurnBased,
    #[error("wrong game class: {0}")]
    WrongClass(String),
    #[error("budget exceeded: {required} candidates needed, budget {budget}")]
    BudgetExceeded { required: f64, budget: u64 },
    #[error("degenerate segment: endpoint utilities differ by {0:e}")]
    DegenerateSegment(f64),
    #[error("horizon too short: gamma^H/(1-gamma) = {tail:e} > eps/2 = {half_eps:e}")]
    HorizonTooShort { tail: f64, half_eps: f64 },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph needs at least 2 vertices")]
    GraphTooSmall,
    #[error("strategy is not pure")]
    NotPure,
    #[error("bad discount pair: gamma' = {gamma_prime} must lie in (gamma = {gamma}, 1]")]
    BadDiscountPair { gamma: f64, gamma_prime: f64 },
    #[error("discount mode mismatch: {0}")]
    WrongMode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no candidate in the value net admits feasible policies")]
    NoFeasibleCandidate,
    #[error("lp: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, SgError>;
