//! Numeric constants shared by the solvers, samplers and checks.

/// Maximum deviation of a probability vector (or matrix row) sum from one.
pub const SUM_TOL: f64 = 1e-12;

/// Power iteration stops once successive iterates differ by less than this
/// in total variation.
pub const POWER_ITERATION_TV: f64 = 1e-13;

pub const POWER_ITERATION_MAX: usize = 1_000_000;

/// Holding weight mixed into the substochastic block before power iteration.
/// The fixed point is unchanged; the holding removes the oscillation of
/// periodic blocks (eigenvalue -1 mode).
pub const POWER_ITERATION_HOLDING: f64 = 0.1;

/// A QSD or stationary vector is accepted when its one-step residual is below this.
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// Detailed-balance residual accepted for birth-death equilibria.
pub const DETAILED_BALANCE_TOL: f64 = 1e-14;

/// Upper bound on `n_states * (max T_corr + 1)` for extended-law propagation.
pub const EXTENDED_STATE_BUDGET: usize = 10_000;

/// Default cap on rejection-dephasing restarts per sample.
pub const REJECTION_RESTART_BUDGET: u64 = 1_000_000;

/// Significance level of every statistical acceptance test.
pub const SIGNIFICANCE: f64 = 1e-3;

/// Number of standard errors allowed between an estimate and its oracle.
pub const Z_THRESHOLD: f64 = 3.0;
