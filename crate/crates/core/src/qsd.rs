//! Quasistationary distributions: the exact solver for finite chains and the
//! three ways of producing the N starting points of a Parallel Step.

use rayon::prelude::*;

use crate::chain::{finite_space, transition_matrix, ChainKernel, TransitionMatrix};
use crate::distribution::{total_variation, FiniteDistribution, IndexSampler};
use crate::error::{Error, Result};
use crate::metastable::{MetastableCollection, SetId};
use crate::rng::{Context, RngStream, StreamFamily};
use crate::tolerances::{
    POWER_ITERATION_HOLDING, POWER_ITERATION_MAX, POWER_ITERATION_TV, SUM_TOL,
};

/// Left Perron vector of a substochastic block, normalized to a probability
/// vector over the block's local indices.
#[derive(Debug, Clone)]
pub struct BlockQsd {
    pub weights: Vec<f64>,
    /// One-step survival probability `P_nu(X_1 in S)`, the Perron root.
    pub survival: f64,
    pub iterations: usize,
}

/// Power iteration with renormalization on `theta I + (1 - theta) B`.
///
/// Each plain iteration is one step of the survival conditioning; the holding
/// weight keeps the same fixed point and damps the period-two oscillation of
/// bipartite blocks. Stops once successive iterates are within
/// [`POWER_ITERATION_TV`] in total variation.
pub fn block_qsd(block: &TransitionMatrix, start: Option<&[f64]>) -> Result<BlockQsd> {
    let n = block.n();
    if n == 0 {
        return Err(Error::Precondition("empty set".into()));
    }
    let mut v = match start {
        Some(s) => {
            let total: f64 = s.iter().sum();
            s.iter().map(|x| x / total).collect()
        }
        None => vec![1.0 / n as f64; n],
    };
    let mut next = vec![0.0; n];
    let theta = POWER_ITERATION_HOLDING;
    let mut diff = f64::INFINITY;
    for it in 1..=POWER_ITERATION_MAX {
        block.left_mul_into(&v, &mut next);
        let mass: f64 = next.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::DegenerateSet(format!("block of size {n}")));
        }
        let scale = (1.0 - theta) / (theta + (1.0 - theta) * mass);
        let keep = theta / (theta + (1.0 - theta) * mass);
        diff = 0.0;
        for (vi, ni) in v.iter_mut().zip(next.iter()) {
            let w = keep * *vi + scale * ni;
            diff += (w - *vi).abs();
            *vi = w;
        }
        diff *= 0.5;
        if diff < POWER_ITERATION_TV {
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            block.left_mul_into(&v, &mut next);
            let survival = next.iter().sum();
            return Ok(BlockQsd {
                weights: v,
                survival,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "QSD power iteration",
        iterations: POWER_ITERATION_MAX,
        residual: diff,
    })
}

/// Exact QSD of a finite chain in one metastable set, as a distribution over
/// the whole state space (zero outside the set).
pub fn exact_qsd<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
) -> Result<FiniteDistribution> {
    Ok(exact_qsd_detailed(kernel, coll, set)?.distribution)
}

#[derive(Debug, Clone)]
pub struct QsdSolution {
    pub distribution: FiniteDistribution,
    pub members: Vec<usize>,
    /// `P_nu(X_1 not in S)`.
    pub escape: f64,
    pub iterations: usize,
}

pub fn exact_qsd_detailed<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
) -> Result<QsdSolution> {
    let matrix = transition_matrix(kernel)?;
    let members = coll.members(kernel, set)?;
    if members.is_empty() {
        return Err(Error::Precondition(format!(
            "set {} is empty",
            coll.name(set)
        )));
    }
    let block = matrix.restrict(&members);
    let solved = block_qsd(&block, None)?;
    let mut weights = vec![0.0; matrix.n()];
    for (&i, &w) in members.iter().zip(&solved.weights) {
        weights[i] = w;
    }
    Ok(QsdSolution {
        distribution: FiniteDistribution::new(weights)?,
        members,
        escape: 1.0 - solved.survival,
        iterations: solved.iterations,
    })
}

/// Total-variation distance between `nu` and its one-step pushforward
/// conditioned on staying in the set. Zero exactly at the QSD.
pub fn qsd_residual<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
    nu: &FiniteDistribution,
) -> Result<f64> {
    let space = finite_space(kernel)?;
    let n = space.n_states();
    if nu.len() != n {
        return Err(Error::Precondition(format!(
            "distribution has {} entries, chain has {n} states",
            nu.len()
        )));
    }
    let inside: Vec<bool> = (0..n)
        .map(|i| coll.contains(set, &space.state_at(i)))
        .collect();
    if nu
        .weights()
        .iter()
        .zip(&inside)
        .any(|(&w, &s)| w > 0.0 && !s)
    {
        return Err(Error::Precondition(
            "distribution not supported in the set".into(),
        ));
    }
    let mut push = vec![0.0; n];
    for (i, &w) in nu.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (j, p) in space.row(i) {
            if inside[j] {
                push[j] += w * p;
            }
        }
    }
    let mass: f64 = push.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::DegenerateSet(coll.name(set).to_string()));
    }
    push.iter_mut().for_each(|p| *p /= mass);
    Ok(total_variation(nu.weights(), &push))
}

/// `P_nu(X_1 not in S)` for a distribution supported in the set.
pub fn escape_probability<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
    nu: &FiniteDistribution,
) -> Result<f64> {
    let space = finite_space(kernel)?;
    let mut out = 0.0;
    for (i, &w) in nu.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (j, p) in space.row(i) {
            if !coll.contains(set, &space.state_at(j)) {
                out += w * p;
            }
        }
    }
    Ok(out)
}

/// Draws states of a finite chain from a fixed distribution.
#[derive(Debug, Clone)]
pub struct StateSampler<S> {
    sampler: IndexSampler,
    states: Vec<S>,
}

impl<S: Clone> StateSampler<S> {
    pub fn new<K: ChainKernel<State = S>>(kernel: &K, dist: &FiniteDistribution) -> Result<Self> {
        let space = finite_space(kernel)?;
        let sampler = dist.sampler();
        let states = sampler
            .support()
            .iter()
            .map(|&i| space.state_at(i))
            .collect();
        Ok(Self { sampler, states })
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> S {
        let i = self.sampler.sample(rng);
        let k = self
            .sampler
            .support()
            .binary_search(&i)
            .expect("sampled index in support");
        self.states[k].clone()
    }
}

/// The N dephased starting points and the chain steps spent producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingOutcome<S> {
    pub samples: Vec<S>,
    pub work: u64,
    /// Discarded trajectories (rejection) or total extinctions (Fleming-Viot).
    pub restarts: u64,
}

/// Rejection dephasing: trajectories from `start` that leave the set before
/// surviving `t_phase` steps are discarded and restarted. Sample `i` uses its
/// own stream, so the outcome is independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn dephase_rejection<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
    n: usize,
    t_phase: u64,
    start: &K::State,
    streams: StreamFamily,
    restart_budget: u64,
) -> Result<DephasingOutcome<K::State>> {
    if !coll.contains(set, start) {
        return Err(Error::Precondition(format!(
            "dephasing start {start:?} not in set {}",
            coll.name(set)
        )));
    }
    let results: Vec<Result<(K::State, u64, u64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(Context::Dephasing, i as u64);
            let mut work = 0u64;
            let mut restarts = 0u64;
            'attempt: loop {
                let mut x = start.clone();
                for _ in 0..t_phase {
                    x = kernel.step(&x, &mut rng);
                    work += 1;
                    if !coll.contains(set, &x) {
                        restarts += 1;
                        if restarts > restart_budget {
                            return Err(Error::RejectionBudget {
                                set: coll.name(set).to_string(),
                                restarts: restart_budget,
                            });
                        }
                        continue 'attempt;
                    }
                }
                return Ok((x, work, restarts));
            }
        })
        .collect();
    let mut out = DephasingOutcome {
        samples: Vec::with_capacity(n),
        work: 0,
        restarts: 0,
    };
    for r in results {
        let (x, w, k) = r?;
        out.samples.push(x);
        out.work += w;
        out.restarts += k;
    }
    Ok(out)
}

/// What a Fleming-Viot dephaser does when every walker leaves in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtinctionPolicy {
    /// Put every walker back at the start state and keep going.
    #[default]
    Restart,
    Fail,
}

/// Fleming-Viot dephasing.
///
/// All walkers start at `start`. After each synchronous step, walkers outside
/// the set are moved, in replica order, onto the position of a walker chosen
/// uniformly among those that survived that step.
#[allow(clippy::too_many_arguments)]
pub fn dephase_fleming_viot<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
    n: usize,
    t_phase: u64,
    start: &K::State,
    streams: StreamFamily,
    policy: ExtinctionPolicy,
) -> Result<DephasingOutcome<K::State>> {
    if n < 2 {
        return Err(Error::Precondition(
            "Fleming-Viot dephasing needs at least two walkers".into(),
        ));
    }
    if !coll.contains(set, start) {
        return Err(Error::Precondition(format!(
            "dephasing start {start:?} not in set {}",
            coll.name(set)
        )));
    }
    let mut walkers = vec![start.clone(); n];
    let mut rngs: Vec<RngStream> = (0..n)
        .map(|i| streams.stream(Context::Dephasing, i as u64))
        .collect();
    let mut picker = streams.stream(Context::Resampling, 0);
    let mut alive = vec![true; n];
    let mut survivors = Vec::with_capacity(n);
    let mut restarts = 0;
    for _ in 0..t_phase {
        survivors.clear();
        for i in 0..n {
            walkers[i] = kernel.step(&walkers[i], &mut rngs[i]);
            alive[i] = coll.contains(set, &walkers[i]);
            if alive[i] {
                survivors.push(i);
            }
        }
        if survivors.is_empty() {
            if policy == ExtinctionPolicy::Fail {
                return Err(Error::TotalExtinction {
                    set: coll.name(set).to_string(),
                    walkers: n,
                });
            }
            restarts += 1;
            walkers.iter_mut().for_each(|w| *w = start.clone());
            continue;
        }
        if survivors.len() < n {
            for i in 0..n {
                if !alive[i] {
                    let j = survivors[picker.below(survivors.len() as u64) as usize];
                    walkers[i] = walkers[j].clone();
                }
            }
        }
    }
    Ok(DephasingOutcome {
        samples: walkers,
        work: n as u64 * t_phase,
        restarts,
    })
}

/// Idealized dephasing: N independent exact draws from the QSD.
pub fn dephase_exact<S: Clone>(
    qsd: &StateSampler<S>,
    n: usize,
    rng: &mut RngStream,
) -> DephasingOutcome<S> {
    DephasingOutcome {
        samples: (0..n).map(|_| qsd.sample(rng)).collect(),
        work: 0,
        restarts: 0,
    }
}

/// Checks a vector against the probability-vector invariants.
pub fn is_probability_vector(w: &[f64]) -> bool {
    w.iter().all(|x| *x >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= SUM_TOL
}
