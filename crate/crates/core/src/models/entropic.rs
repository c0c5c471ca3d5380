//! Two-box random walk with an entropic barrier.
//!
//! Left box `{-1..-100}^2`, right box `{1..200}^2`. A direction is proposed
//! uniformly among up, down, left and right; moves leaving the boxes are
//! rejected. The boxes communicate only through two passages:
//! `(-1,-1) <-> (1,1)` and `(-1,-100) <-> (1,100)` (a right proposal from the
//! left end, a left proposal from the right end).
//!
//! State indices: left box first, row-major in `(|y|, |x|)`, i.e.
//! `index = (-y - 1) * 100 + (-x - 1)`; then the right box row-major,
//! `index = 10_000 + (y - 1) * 200 + (x - 1)`.

use crate::chain::{ChainKernel, FiniteSpace};
use crate::error::Result;
use crate::metastable::MetastableCollection;
use crate::observable::Observable;
use crate::rng::RngStream;

pub type Site = (i32, i32);

pub const LEFT_SIDE: i32 = 100;
pub const RIGHT_SIDE: i32 = 200;
pub const N_STATES: usize = (LEFT_SIDE * LEFT_SIDE + RIGHT_SIDE * RIGHT_SIDE) as usize;

const LEFT_STATES: usize = (LEFT_SIDE * LEFT_SIDE) as usize;
const PASSAGES: [(Site, Site); 2] = [((-1, -1), (1, 1)), ((-1, -LEFT_SIDE), (1, 100))];

#[derive(Debug, Clone, Copy, Default)]
pub struct EntropicWalk;

#[inline]
fn in_left(&(x, y): &Site) -> bool {
    (-LEFT_SIDE..=-1).contains(&x) && (-LEFT_SIDE..=-1).contains(&y)
}

#[inline]
fn in_right(&(x, y): &Site) -> bool {
    (1..=RIGHT_SIDE).contains(&x) && (1..=RIGHT_SIDE).contains(&y)
}

impl EntropicWalk {
    pub fn new() -> Self {
        Self
    }

    /// Successor of `site` under proposal `dir` (0 up, 1 down, 2 left, 3 right).
    #[inline]
    pub fn propose(site: &Site, dir: u8) -> Site {
        let (x, y) = *site;
        match dir {
            3 => {
                for (l, r) in PASSAGES {
                    if *site == l {
                        return r;
                    }
                }
            }
            2 => {
                for (l, r) in PASSAGES {
                    if *site == r {
                        return l;
                    }
                }
            }
            _ => {}
        }
        let next = match dir {
            0 => (x, y + 1),
            1 => (x, y - 1),
            2 => (x - 1, y),
            _ => (x + 1, y),
        };
        let same_box = if x < 0 {
            in_left(&next)
        } else {
            in_right(&next)
        };
        if same_box {
            next
        } else {
            *site
        }
    }

    /// `S1` = left box, `S2` = right box.
    pub fn collection(
        t_corr_left: u64,
        t_phase_left: u64,
        t_corr_right: u64,
        t_phase_right: u64,
    ) -> Result<MetastableCollection<Site>> {
        MetastableCollection::new()
            .with_set("S1", t_corr_left, t_phase_left, in_left)?
            .with_set("S2", t_corr_right, t_phase_right, in_right)
    }

    /// `x`, `y`, and `f = 1{y in [101, 200]}`.
    pub fn observables() -> Vec<Observable<Site>> {
        vec![
            Observable::new("x", |s: &Site| s.0 as f64),
            Observable::new("y", |s: &Site| s.1 as f64),
            Observable::new("f", |s: &Site| if s.1 >= 101 { 1.0 } else { 0.0 }),
        ]
    }
}

impl ChainKernel for EntropicWalk {
    type State = Site;

    #[inline]
    fn step(&self, x: &Site, rng: &mut RngStream) -> Site {
        Self::propose(x, rng.quarter())
    }

    fn contains(&self, x: &Site) -> bool {
        in_left(x) || in_right(x)
    }

    fn finite(&self) -> Option<&dyn FiniteSpace<Site>> {
        Some(self)
    }
}

impl FiniteSpace<Site> for EntropicWalk {
    fn n_states(&self) -> usize {
        N_STATES
    }

    fn index_of(&self, s: &Site) -> Option<usize> {
        let &(x, y) = s;
        if in_left(s) {
            Some(((-y - 1) * LEFT_SIDE + (-x - 1)) as usize)
        } else if in_right(s) {
            Some(LEFT_STATES + ((y - 1) * RIGHT_SIDE + (x - 1)) as usize)
        } else {
            None
        }
    }

    fn state_at(&self, i: usize) -> Site {
        assert!(i < N_STATES, "state index {i} out of range");
        if i < LEFT_STATES {
            let i = i as i32;
            (-(i % LEFT_SIDE) - 1, -(i / LEFT_SIDE) - 1)
        } else {
            let i = (i - LEFT_STATES) as i32;
            (i % RIGHT_SIDE + 1, i / RIGHT_SIDE + 1)
        }
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let s = self.state_at(i);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(4);
        for dir in 0..4 {
            let j = self
                .index_of(&Self::propose(&s, dir))
                .expect("successor in space");
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some(e) => e.1 += 0.25,
                None => row.push((j, 0.25)),
            }
        }
        row
    }
}
