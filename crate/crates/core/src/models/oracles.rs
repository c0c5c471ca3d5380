//! Exact equilibrium laws, reference averages and the serial baseline.

use crate::chain::{finite_space, transition_matrix, ChainKernel, TransitionMatrix};
use crate::distribution::{total_variation, FiniteDistribution};
use crate::engine::Initial;
use crate::error::{Error, Result};
use crate::observable::{accumulate, Observable};
use crate::qsd::StateSampler;
use crate::rng::{Context, RngStream};
use crate::tolerances::{
    FIXED_POINT_TOL, POWER_ITERATION_HOLDING, POWER_ITERATION_MAX, POWER_ITERATION_TV,
};

/// `||pi P - pi||_1`.
pub fn stationarity_residual(matrix: &TransitionMatrix, pi: &[f64]) -> f64 {
    let next = matrix.left_mul(pi);
    2.0 * total_variation(&next, pi)
}

/// `max_x |pi_x P(x, x+1) - pi_{x+1} P(x+1, x)|` for a nearest-neighbour chain.
pub fn detailed_balance_residual(matrix: &TransitionMatrix, pi: &[f64]) -> f64 {
    (0..matrix.n().saturating_sub(1))
        .map(|x| (pi[x] * matrix.get(x, x + 1) - pi[x + 1] * matrix.get(x + 1, x)).abs())
        .fold(0.0, f64::max)
}

fn is_birth_death(matrix: &TransitionMatrix) -> bool {
    (0..matrix.n()).all(|i| matrix.row(i).all(|(j, _)| i.abs_diff(j) <= 1))
        && (0..matrix.n().saturating_sub(1)).all(|x| matrix.get(x + 1, x) > 0.0)
}

/// Stationary law of a finite ergodic chain.
///
/// Nearest-neighbour (birth-death) chains are solved by the detailed-balance
/// recurrence `pi_{x+1} = pi_x P(x, x+1) / P(x+1, x)`; anything else by
/// power iteration from the uniform law. A doubly stochastic matrix gets the
/// uniform law directly.
pub fn exact_equilibrium<K: ChainKernel>(kernel: &K) -> Result<FiniteDistribution> {
    let matrix = transition_matrix(kernel)?;
    let n = matrix.n();
    let uniform = vec![1.0 / n as f64; n];
    let pi = if stationarity_residual(&matrix, &uniform) <= FIXED_POINT_TOL {
        uniform
    } else if is_birth_death(&matrix) {
        let mut pi = Vec::with_capacity(matrix.n());
        pi.push(1.0);
        for x in 0..matrix.n() - 1 {
            let next = pi[x] * matrix.get(x, x + 1) / matrix.get(x + 1, x);
            pi.push(next);
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        pi
    } else {
        power_iteration(&matrix)?
    };
    let residual = stationarity_residual(&matrix, &pi);
    if residual > FIXED_POINT_TOL {
        return Err(Error::NonConvergence {
            what: "equilibrium",
            iterations: 0,
            residual,
        });
    }
    FiniteDistribution::normalized(pi)
}

fn power_iteration(matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = matrix.n();
    let theta = POWER_ITERATION_HOLDING;
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut diff = f64::INFINITY;
    for _ in 0..POWER_ITERATION_MAX {
        matrix.left_mul_into(&pi, &mut next);
        diff = 0.0;
        for (p, q) in pi.iter_mut().zip(&next) {
            let w = theta * *p + (1.0 - theta) * q;
            diff += (w - *p).abs();
            *p = w;
        }
        diff *= 0.5;
        if diff < POWER_ITERATION_TV {
            return Ok(pi);
        }
    }
    Err(Error::NonConvergence {
        what: "equilibrium power iteration",
        iterations: POWER_ITERATION_MAX,
        residual: diff,
    })
}

/// Named reference averages of a model's observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValues {
    pub model: String,
    pub values: Vec<(String, f64)>,
}

impl ReferenceValues {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// `E_pi[f]` for each observable.
pub fn equilibrium_averages<K: ChainKernel>(
    kernel: &K,
    pi: &FiniteDistribution,
    observables: &[Observable<K::State>],
) -> Result<Vec<f64>> {
    let space = finite_space(kernel)?;
    Ok(observables
        .iter()
        .map(|o| pi.expectation(|i| o.eval(&space.state_at(i))))
        .collect())
}

/// Plain ergodic average `(f(X_0) + ... + f(X_{n-1})) / n` along one trajectory.
pub fn serial_estimate<K: ChainKernel>(
    kernel: &K,
    observables: &[Observable<K::State>],
    initial: &Initial<K::State>,
    n_steps: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Err(Error::Precondition(
            "serial estimate needs at least one step".into(),
        ));
    }
    let mut x = match initial {
        Initial::State(x) => x.clone(),
        Initial::Distribution(d) => {
            let mut rng = RngStream::with(seed, Context::Initial, 0, 0);
            StateSampler::new(kernel, d)?.sample(&mut rng)
        }
    };
    if !kernel.contains(&x) {
        return Err(Error::Domain(format!("{x:?}")));
    }
    let mut rng = RngStream::with(seed, Context::Serial, 0, 0);
    let mut sums = vec![0.0; observables.len()];
    accumulate(observables, &x, &mut sums);
    for _ in 1..n_steps {
        x = kernel.step(&x, &mut rng);
        accumulate(observables, &x, &mut sums);
    }
    Ok(sums.into_iter().map(|s| s / n_steps as f64).collect())
}
