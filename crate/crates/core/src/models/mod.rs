//! Benchmark chains and the exact oracles built on them.

pub mod biased;
pub mod entropic;
pub mod extended;
pub mod oracles;
pub mod toy;

pub use biased::BiasedWalk;
pub use entropic::{EntropicWalk, Site};
pub use extended::{propagate_extended_law, propagate_law, ExtendedChain, ExtendedState};
pub use oracles::{
    detailed_balance_residual, equilibrium_averages, exact_equilibrium, serial_estimate,
    stationarity_residual, ReferenceValues,
};
