//! The collection of disjoint metastable sets and their timing parameters.

use std::fmt;
use std::sync::Arc;

use crate::chain::{finite_space, ChainKernel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetId(pub usize);

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

type Membership<S> = Arc<dyn Fn(&S) -> bool + Send + Sync>;

pub struct MetastableSet<S> {
    name: String,
    t_corr: u64,
    t_phase: u64,
    member: Membership<S>,
}

impl<S> Clone for MetastableSet<S> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            t_corr: self.t_corr,
            t_phase: self.t_phase,
            member: Arc::clone(&self.member),
        }
    }
}

impl<S> fmt::Debug for MetastableSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetastableSet")
            .field("name", &self.name)
            .field("t_corr", &self.t_corr)
            .field("t_phase", &self.t_phase)
            .finish_non_exhaustive()
    }
}

/// Disjoint labeled sets with per-set decorrelation and dephasing times.
pub struct MetastableCollection<S> {
    sets: Vec<MetastableSet<S>>,
}

impl<S> Clone for MetastableCollection<S> {
    fn clone(&self) -> Self {
        Self {
            sets: self.sets.clone(),
        }
    }
}

impl<S> fmt::Debug for MetastableCollection<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.sets).finish()
    }
}

impl<S> Default for MetastableCollection<S> {
    fn default() -> Self {
        Self { sets: Vec::new() }
    }
}

fn check_times(name: &str, t_corr: u64, t_phase: u64) -> Result<()> {
    if t_corr == 0 || t_phase == 0 {
        return Err(Error::Config(format!(
            "set {name}: T_corr and T_phase must be at least 1 (got {t_corr}, {t_phase})"
        )));
    }
    Ok(())
}

impl<S> MetastableCollection<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a set given by a membership predicate.
    pub fn with_set(
        mut self,
        name: impl Into<String>,
        t_corr: u64,
        t_phase: u64,
        member: impl Fn(&S) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        check_times(&name, t_corr, t_phase)?;
        if self.sets.iter().any(|s| s.name == name) {
            return Err(Error::Config(format!("duplicate set name {name}")));
        }
        self.sets.push(MetastableSet {
            name,
            t_corr,
            t_phase,
            member: Arc::new(member),
        });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SetId> {
        (0..self.sets.len()).map(SetId)
    }

    pub fn name(&self, id: SetId) -> &str {
        &self.sets[id.0].name
    }

    pub fn id_of(&self, name: &str) -> Option<SetId> {
        self.sets.iter().position(|s| s.name == name).map(SetId)
    }

    pub fn t_corr(&self, id: SetId) -> u64 {
        self.sets[id.0].t_corr
    }

    pub fn t_phase(&self, id: SetId) -> u64 {
        self.sets[id.0].t_phase
    }

    pub fn set_times(&mut self, id: SetId, t_corr: u64, t_phase: u64) -> Result<()> {
        check_times(&self.sets[id.0].name, t_corr, t_phase)?;
        let s = &mut self.sets[id.0];
        s.t_corr = t_corr;
        s.t_phase = t_phase;
        Ok(())
    }

    pub fn max_t_corr(&self) -> u64 {
        self.sets.iter().map(|s| s.t_corr).max().unwrap_or(0)
    }

    #[inline]
    pub fn contains(&self, id: SetId, x: &S) -> bool {
        (self.sets[id.0].member)(x)
    }

    /// The unique set containing `x`, or an error if two sets claim it.
    pub fn locate(&self, x: &S) -> Result<Option<SetId>> {
        let mut found = None;
        for (k, s) in self.sets.iter().enumerate() {
            if (s.member)(x) {
                if let Some(SetId(prev)) = found {
                    return Err(Error::Config(format!(
                        "sets {} and {} overlap",
                        self.sets[prev].name, s.name
                    )));
                }
                found = Some(SetId(k));
            }
        }
        Ok(found)
    }

    /// First matching set; assumes disjointness has been validated.
    #[inline]
    pub fn locate_unchecked(&self, x: &S) -> Option<SetId> {
        self.sets.iter().position(|s| (s.member)(x)).map(SetId)
    }
}

impl MetastableCollection<usize> {
    /// Adds a set of `usize` states, stored as a bitset over `0..n`. For a
    /// [`MatrixKernel`](crate::chain::MatrixKernel) states are the indices.
    pub fn with_indices(
        self,
        name: impl Into<String>,
        t_corr: u64,
        t_phase: u64,
        n: usize,
        indices: &[usize],
    ) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::Config(format!("set member {i} outside 0..{n}")));
            }
            bits[i] = true;
        }
        self.with_set(name, t_corr, t_phase, move |x: &usize| {
            bits.get(*x).copied().unwrap_or(false)
        })
    }
}

/// Result of an exhaustive scan of a finite chain against a collection.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// `set_of[i]` is the set containing state index `i`.
    pub set_of: Vec<Option<SetId>>,
    /// Sorted member indices of each set.
    pub members: Vec<Vec<usize>>,
    /// Largest one-step escape probability over the members of each set.
    pub max_escape: Vec<f64>,
}

impl Diagnostics {
    pub fn size(&self, id: SetId) -> usize {
        self.members[id.0].len()
    }
}

impl<S> MetastableCollection<S> {
    /// Checks disjointness over every state and that no set is absorbing.
    pub fn validate<K>(&self, kernel: &K) -> Result<Diagnostics>
    where
        K: ChainKernel<State = S>,
    {
        let space = finite_space(kernel)?;
        let n = space.n_states();
        let mut set_of = Vec::with_capacity(n);
        let mut members = vec![Vec::new(); self.sets.len()];
        for i in 0..n {
            let id = self.locate(&space.state_at(i))?;
            if let Some(id) = id {
                members[id.0].push(i);
            }
            set_of.push(id);
        }
        let mut max_escape = vec![0.0; self.sets.len()];
        for (k, m) in members.iter().enumerate() {
            if m.is_empty() {
                return Err(Error::Config(format!(
                    "set {} has no states",
                    self.sets[k].name
                )));
            }
            for &i in m {
                let out: f64 = space
                    .row(i)
                    .into_iter()
                    .filter(|&(j, _)| set_of[j] != Some(SetId(k)))
                    .map(|(_, p)| p)
                    .sum();
                max_escape[k] = f64::max(max_escape[k], out);
            }
            if max_escape[k] <= 0.0 {
                return Err(Error::Config(format!(
                    "set {} is absorbing: no member can leave it",
                    self.sets[k].name
                )));
            }
        }
        Ok(Diagnostics {
            set_of,
            members,
            max_escape,
        })
    }

    /// Sorted indices of the states in one set.
    pub fn members<K>(&self, kernel: &K, id: SetId) -> Result<Vec<usize>>
    where
        K: ChainKernel<State = S>,
    {
        let space = finite_space(kernel)?;
        Ok((0..space.n_states())
            .filter(|&i| self.contains(id, &space.state_at(i)))
            .collect())
    }
}
