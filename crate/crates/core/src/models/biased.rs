//! Biased nearest-neighbour walk on `{1..60}` with energetic barriers.
//!
//! From `x` the walk moves to `max(1, x - 1)` with probability `p_x` and to
//! `min(60, x + 1)` otherwise. State `x` has index `x - 1`.

use crate::chain::{ChainKernel, FiniteSpace};
use crate::error::Result;
use crate::metastable::MetastableCollection;
use crate::observable::Observable;
use crate::rng::RngStream;

pub const N_STATES: usize = 60;

/// Probability of a left move at `x`.
pub fn left_probability(x: usize) -> f64 {
    match x {
        1..=15 => 0.6,
        16..=30 => 0.4,
        31..=45 => 0.65,
        _ => 0.35,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BiasedWalk;

impl BiasedWalk {
    pub fn new() -> Self {
        Self
    }

    /// `S1 = {1..15}`, `S2 = {16..45}`, `S3 = {46..60}`; times listed per set.
    pub fn collection(t_corr: [u64; 3], t_phase: [u64; 3]) -> Result<MetastableCollection<usize>> {
        MetastableCollection::new()
            .with_set("S1", t_corr[0], t_phase[0], |x: &usize| {
                (1..=15).contains(x)
            })?
            .with_set("S2", t_corr[1], t_phase[1], |x: &usize| {
                (16..=45).contains(x)
            })?
            .with_set("S3", t_corr[2], t_phase[2], |x: &usize| {
                (46..=60).contains(x)
            })
    }

    /// `x` and `f = 1{x in [31, 60]}`.
    pub fn observables() -> Vec<Observable<usize>> {
        vec![
            Observable::new("x", |x: &usize| *x as f64),
            Observable::new("f", |x: &usize| if *x >= 31 { 1.0 } else { 0.0 }),
        ]
    }
}

impl ChainKernel for BiasedWalk {
    type State = usize;

    #[inline]
    fn step(&self, x: &usize, rng: &mut RngStream) -> usize {
        if rng.uniform() < left_probability(*x) {
            (*x - 1).max(1)
        } else {
            (*x + 1).min(N_STATES)
        }
    }

    fn contains(&self, x: &usize) -> bool {
        (1..=N_STATES).contains(x)
    }

    fn finite(&self) -> Option<&dyn FiniteSpace<usize>> {
        Some(self)
    }
}

impl FiniteSpace<usize> for BiasedWalk {
    fn n_states(&self) -> usize {
        N_STATES
    }

    fn index_of(&self, x: &usize) -> Option<usize> {
        self.contains(x).then(|| x - 1)
    }

    fn state_at(&self, i: usize) -> usize {
        assert!(i < N_STATES);
        i + 1
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let x = i + 1;
        let p = left_probability(x);
        let left = (x - 1).max(1) - 1;
        let right = (x + 1).min(N_STATES) - 1;
        if left == right {
            vec![(left, 1.0)]
        } else {
            vec![(left, p), (right, 1.0 - p)]
        }
    }
}
