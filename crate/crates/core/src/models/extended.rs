//! Exact law of the single-replica extended process `Y_n = (X, t)`.
//!
//! The counter `t` records how many consecutive steps the chain has survived
//! in its current metastable set, saturating at `T_corr`:
//!
//! 1. from `(y, t)` with `t < T_corr - 1`, step from `y`; stay in the set with
//!    counter `t + 1`, otherwise counter `0`;
//! 2. from `(y, T_corr - 1)`, replace `y` by an exact QSD draw `z`, step from
//!    `z`; stay in the set with counter `T_corr`, otherwise `0`;
//! 3. from `(y, T_corr)`, step from `y`; counter stays `T_corr` while in the
//!    set, `0` on exit.
//!
//! Outside every set the counter is `0`. Started with counter `0`, the state
//! marginal equals the law of the original chain whenever the chain reaches
//! its QSD exactly after `T_corr` consecutive steps in a set.

use crate::chain::{finite_space, transition_matrix, ChainKernel, TransitionMatrix};
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::metastable::MetastableCollection;
use crate::qsd::exact_qsd;
use crate::tolerances::EXTENDED_STATE_BUDGET;

/// A state of the extended process: chain state index and survival counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtendedState {
    pub x: usize,
    pub t: u64,
}

#[derive(Debug, Clone)]
pub struct ExtendedChain {
    matrix: TransitionMatrix,
    /// Set index of each state (`usize::MAX` outside every set).
    set_of: Vec<usize>,
    t_corr: Vec<u64>,
    /// Pushforward `sum_z nu_S(z) P(z, .)` of each set's QSD.
    qsd_step: Vec<Vec<(usize, f64)>>,
    offset: Vec<usize>,
    size: usize,
}

const OUTSIDE: usize = usize::MAX;

impl ExtendedChain {
    pub fn new<K: ChainKernel>(kernel: &K, coll: &MetastableCollection<K::State>) -> Result<Self> {
        let space = finite_space(kernel)?;
        let n = space.n_states();
        let required = n * (coll.max_t_corr() as usize + 1);
        if required > EXTENDED_STATE_BUDGET {
            return Err(Error::Capacity {
                required,
                budget: EXTENDED_STATE_BUDGET,
            });
        }
        let diag = coll.validate(kernel)?;
        let matrix = transition_matrix(kernel)?;
        let set_of: Vec<usize> = diag
            .set_of
            .iter()
            .map(|s| s.map_or(OUTSIDE, |s| s.0))
            .collect();
        let t_corr: Vec<u64> = coll.ids().map(|s| coll.t_corr(s)).collect();
        let mut qsd_step = Vec::with_capacity(coll.len());
        for s in coll.ids() {
            let nu = exact_qsd(kernel, coll, s)?;
            let push = matrix.left_mul(nu.weights());
            qsd_step.push(
                push.into_iter()
                    .enumerate()
                    .filter(|(_, p)| *p > 0.0)
                    .collect(),
            );
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut size = 0;
        for &s in &set_of {
            offset.push(size);
            size += if s == OUTSIDE {
                1
            } else {
                t_corr[s] as usize + 1
            };
        }
        offset.push(size);
        Ok(Self {
            matrix,
            set_of,
            t_corr,
            qsd_step,
            offset,
            size,
        })
    }

    /// Number of reachable extended states.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn index(&self, s: ExtendedState) -> usize {
        debug_assert!(self.offset[s.x] + (s.t as usize) < self.offset[s.x + 1]);
        self.offset[s.x] + s.t as usize
    }

    /// Law of `Y_0`: `xi` on the states with counter zero.
    pub fn initial(&self, xi: &FiniteDistribution) -> Result<Vec<f64>> {
        if xi.len() != self.matrix.n() {
            return Err(Error::Precondition(
                "initial law has the wrong length".into(),
            ));
        }
        let mut law = vec![0.0; self.size];
        for (x, &w) in xi.weights().iter().enumerate() {
            law[self.offset[x]] = w;
        }
        Ok(law)
    }

    fn counter_after(&self, set: usize, t_next: u64, j: usize) -> usize {
        if set != OUTSIDE && self.set_of[j] == set {
            self.offset[j] + t_next as usize
        } else {
            self.offset[j]
        }
    }

    /// One step of the extended law.
    pub fn step(&self, law: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; self.size];
        for x in 0..self.matrix.n() {
            let set = self.set_of[x];
            let cap = if set == OUTSIDE { 0 } else { self.t_corr[set] };
            for t in 0..=cap {
                let m = law[self.offset[x] + t as usize];
                if m == 0.0 {
                    continue;
                }
                if set == OUTSIDE {
                    for (j, p) in self.matrix.row(x) {
                        next[self.offset[j]] += m * p;
                    }
                } else if t + 1 == cap {
                    for &(j, p) in &self.qsd_step[set] {
                        next[self.counter_after(set, cap, j)] += m * p;
                    }
                } else {
                    let t_next = (t + 1).min(cap);
                    for (j, p) in self.matrix.row(x) {
                        next[self.counter_after(set, t_next, j)] += m * p;
                    }
                }
            }
        }
        next
    }

    /// Projection onto the chain state.
    pub fn marginal(&self, law: &[f64]) -> Vec<f64> {
        (0..self.matrix.n())
            .map(|x| law[self.offset[x]..self.offset[x + 1]].iter().sum())
            .collect()
    }

    /// Probability of each `(x, t)` with positive mass.
    pub fn support(&self, law: &[f64]) -> Vec<(ExtendedState, f64)> {
        let mut out = Vec::new();
        for x in 0..self.matrix.n() {
            for (t, &w) in law[self.offset[x]..self.offset[x + 1]].iter().enumerate() {
                if w > 0.0 {
                    out.push((ExtendedState { x, t: t as u64 }, w));
                }
            }
        }
        out
    }
}

/// Law of `X` after `n` steps of the extended process started at `(xi, 0)`.
pub fn propagate_extended_law<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    xi: &FiniteDistribution,
    n: usize,
) -> Result<FiniteDistribution> {
    let chain = ExtendedChain::new(kernel, coll)?;
    let mut law = chain.initial(xi)?;
    for _ in 0..n {
        law = chain.step(&law);
    }
    FiniteDistribution::normalized(chain.marginal(&law))
}

/// Law of `X_n` by repeated multiplication with the transition matrix.
pub fn propagate_law<K: ChainKernel>(
    kernel: &K,
    xi: &FiniteDistribution,
    n: usize,
) -> Result<FiniteDistribution> {
    let matrix = transition_matrix(kernel)?;
    let mut law = xi.weights().to_vec();
    for _ in 0..n {
        law = matrix.left_mul(&law);
    }
    FiniteDistribution::normalized(law)
}
