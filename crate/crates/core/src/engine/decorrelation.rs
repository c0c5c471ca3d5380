use crate::chain::ChainKernel;
use crate::error::{Error, Result};
use crate::metastable::{MetastableCollection, SetId};
use crate::observable::{accumulate, Observable};
use crate::rng::RngStream;

use super::Accumulators;

/// End of a Decorrelation Step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decorrelated<S> {
    /// Absolute time at which the step ended.
    pub sigma: u64,
    pub state: S,
    pub set: SetId,
    /// `sigma` minus the simulation time at entry.
    pub steps: u64,
}

/// Evolves the chain exactly from `x0 = X_{T_sim}` until the last `T_corr(S)`
/// states lie in one set `S`, with the window allowed to start at `X_{T_sim}`.
///
/// Adds `f(X_{T_sim+1}) + ... + f(X_sigma)` to `acc.f_sim`, charges the same
/// number of steps to the wall clock and sets `acc.t_sim = sigma`.
pub fn decorrelation_step<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    x0: K::State,
    acc: &mut Accumulators,
    observables: &[Observable<K::State>],
    rng: &mut RngStream,
    cap: Option<u64>,
) -> Result<Decorrelated<K::State>> {
    let mut x = x0;
    let mut current = coll.locate_unchecked(&x);
    let mut run: u64 = u64::from(current.is_some());
    let mut steps = 0u64;
    let set = loop {
        if let Some(s) = current {
            if run >= coll.t_corr(s) {
                break s;
            }
        }
        if cap.is_some_and(|c| steps >= c) {
            return Err(Error::DecorrelationTimeout { cap: cap.unwrap() });
        }
        x = kernel.step(&x, rng);
        steps += 1;
        accumulate(observables, &x, &mut acc.f_sim);
        match coll.locate_unchecked(&x) {
            Some(s) if current == Some(s) => run += 1,
            Some(s) => {
                current = Some(s);
                run = 1;
            }
            None => {
                current = None;
                run = 0;
            }
        }
    };
    acc.t_sim += steps;
    acc.wall_clock += steps;
    acc.n_decorr_steps += 1;
    Ok(Decorrelated {
        sigma: acc.t_sim,
        state: x,
        set,
        steps,
    })
}
