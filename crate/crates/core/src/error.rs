use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("player {player} is outside 1..={n}")]
    PlayerOutOfRange { player: usize, n: usize },

    #[error("search budget exceeded for n = {n}: {reason}")]
    BudgetExceeded { n: usize, reason: String },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
}

pub type Result<T> = std::result::Result<T, Error>;
