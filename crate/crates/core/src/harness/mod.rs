//! Experiment runner behind the `parrep` binary: configs, multi-trial
//! sweeps, CSV output, oracle comparison and the invariant suite.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod oracle;
pub mod validate;

pub use config::{ExperimentConfig, ModelKind, SweepVariable};
pub use csv::{emit_csv, parse_csv};
pub use experiment::{
    run_experiment, run_trials, summarize, trial_seed, ExperimentResult, SweepPoint, SweepSummary,
    TrialRecord,
};
pub use oracle::{compare_against_oracle, read_reference, write_reference, OracleReport};
pub use validate::{config_reference, model_reference, validate_suite, Check};

use crate::error::{Error, Result};

/// Environment variable overriding the worker-pool size.
pub const WORKERS_ENV: &str = "PARREP_WORKERS";

/// Pool size from `explicit`, else `PARREP_WORKERS`, else rayon's default
/// (`None`).
pub fn worker_count(explicit: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = explicit {
        return if n == 0 {
            Err(Error::Config("worker count must be positive".into()))
        } else {
            Ok(Some(n))
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{WORKERS_ENV}={v:?} is not a positive integer"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a dedicated rayon pool of the given size.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}
