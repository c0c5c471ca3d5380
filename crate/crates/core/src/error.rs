use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state that does not belong to the kernel's state space.
    #[error("state outside the state space: {0}")]
    Domain(String),

    #[error("operation requires a finite chain: {0}")]
    Unsupported(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("set {0} is degenerate: no mass survives one step")]
    DegenerateSet(String),

    #[error("rejection dephasing exhausted its budget of {restarts} restarts in set {set}; consider Fleming-Viot dephasing")]
    RejectionBudget { set: String, restarts: u64 },

    #[error("all {walkers} Fleming-Viot walkers left set {set} in the same step")]
    TotalExtinction { set: String, walkers: usize },

    #[error("decorrelation did not finish within {cap} steps")]
    DecorrelationTimeout { cap: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("extended state space of {required} states exceeds the budget of {budget}")]
    Capacity { required: usize, budget: usize },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(&'static str),

    #[error("no oracle value for {0}")]
    MissingOracle(String),

    /// An oracle comparison or invariant check did not hold.
    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Precondition(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
