use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("margin matrix is not skew-symmetric at ({0}, {1})")]
    NotSkewSymmetric(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state space has {states} states, exceeding the cap of {cap}")]
    StateCap { states: usize, cap: usize },

    #[error("mutation rate is zero: the chain is reducible and has many stationary distributions")]
    Reducible,

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("profile has no Condorcet winner; only the asymptotic guarantee applies")]
    NoCondorcetWinner,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("linear program is infeasible")]
    Infeasible,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
