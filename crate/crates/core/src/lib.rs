//! Parallel replica (ParRep) estimation of equilibrium averages for
//! metastable Markov chains.
//!
//! A run alternates three phases. The Decorrelation Step evolves the chain
//! exactly until it has spent `T_corr(S)` consecutive steps in a metastable
//! set `S`. The Dephasing Step draws N approximate samples of the
//! quasistationary distribution (QSD) of `S`. The Parallel Step evolves N
//! replicas from those samples in polling windows and turns the first exit
//! into one accelerated exit event. The ratio `f_sim / T_sim` estimates the
//! equilibrium average of `f`.
//!
//! Finite chains additionally get exact oracles: transition matrices,
//! equilibrium and QSD solvers, and the exact law of the single-replica
//! extended process.
//!
//! ```
//! use parrep::engine::{DephasingMode, Initial, ParRep, ParRepConfig};
//! use parrep::models::BiasedWalk;
//!
//! let kernel = BiasedWalk;
//! let sets = BiasedWalk::collection([90, 90, 60], [90, 90, 60]).unwrap();
//! let observables = BiasedWalk::observables();
//! let config = ParRepConfig {
//!     replicas: 10,
//!     stop_t_sim: 200_000,
//!     dephasing: DephasingMode::FlemingViot,
//!     ..ParRepConfig::default()
//! };
//! let mut parrep = ParRep::new(&kernel, &sets, config, &observables).unwrap();
//! let out = parrep.run(&Initial::State(1), 7).unwrap();
//! assert!(out.acc.t_sim > 200_000);
//! ```

pub mod chain;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod harness;
pub mod metastable;
pub mod models;
pub mod observable;
pub mod qsd;
pub mod rng;
pub mod stats;
pub mod tolerances;

pub use chain::{
    sample_step, transition_matrix, ChainKernel, FiniteSpace, MatrixKernel, TransitionMatrix,
};
pub use distribution::FiniteDistribution;
pub use engine::{speedup, Accumulators, ExitEvent, Initial, ParRep, ParRepConfig};
pub use error::{Error, Result};
pub use metastable::{MetastableCollection, SetId};
pub use observable::Observable;
pub use rng::{RngStream, StreamId};
