//! Transition kernels and exact matrices for finite chains.

use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tolerances::SUM_TOL;

/// A sampleable Markov transition rule.
///
/// `step` must draw randomness only from the stream it is handed: the same
/// stream state and the same input state always produce the same successor.
/// Kernels are immutable and shared by reference across worker threads.
pub trait ChainKernel: Send + Sync {
    type State: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    /// One transition from a state known to be valid.
    fn step(&self, x: &Self::State, rng: &mut RngStream) -> Self::State;

    fn contains(&self, x: &Self::State) -> bool;

    /// Exact enumeration of the state space, when the chain is finite.
    fn finite(&self) -> Option<&dyn FiniteSpace<Self::State>> {
        None
    }
}

/// Enumerated state space with exact transition rows.
///
/// `index_of` and `state_at` form a bijection between states and `0..n_states()`.
pub trait FiniteSpace<S>: Send + Sync {
    fn n_states(&self) -> usize;
    fn index_of(&self, x: &S) -> Option<usize>;
    /// Panics when `i >= n_states()`.
    fn state_at(&self, i: usize) -> S;
    /// Sparse row `i` of the transition matrix as `(column, probability)` pairs.
    fn row(&self, i: usize) -> Vec<(usize, f64)>;
}

/// One checked transition: rejects states outside the kernel's space.
pub fn sample_step<K: ChainKernel>(
    kernel: &K,
    x: &K::State,
    rng: &mut RngStream,
) -> Result<K::State> {
    if !kernel.contains(x) {
        return Err(Error::Domain(format!("{x:?}")));
    }
    Ok(kernel.step(x, rng))
}

pub fn finite_space<K: ChainKernel>(kernel: &K) -> Result<&dyn FiniteSpace<K::State>> {
    kernel
        .finite()
        .ok_or(Error::Unsupported("kernel does not enumerate its states"))
}

/// Exact transition matrix of a finite kernel, in compressed sparse rows.
pub fn transition_matrix<K: ChainKernel>(kernel: &K) -> Result<TransitionMatrix> {
    let space = finite_space(kernel)?;
    TransitionMatrix::from_rows((0..space.n_states()).map(|i| space.row(i)).collect())
}

/// Row-stochastic (or, for restricted blocks, substochastic) sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds a stochastic matrix; duplicate columns in a row are summed and
    /// every row must sum to one within [`SUM_TOL`].
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let m = Self::from_rows_unchecked(rows)?;
        for i in 0..m.n {
            let s: f64 = m.row(i).map(|(_, p)| p).sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::Config(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(m)
    }

    /// Builds a substochastic matrix; only nonnegativity and column range are checked.
    pub fn from_rows_unchecked(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let start = cols.len();
            for (j, p) in row {
                if j >= n {
                    return Err(Error::Config(format!("row {i}: column {j} out of range")));
                }
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::Config(format!("row {i}: invalid probability {p}")));
                }
                if p == 0.0 {
                    continue;
                }
                if cols.len() > start && cols[cols.len() - 1] == j {
                    *vals.last_mut().unwrap() += p;
                } else {
                    cols.push(j);
                    vals.push(p);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let sparse = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != n {
                    return Err(Error::Config(format!(
                        "row {i} has {} entries, expected {n}",
                        r.len()
                    )));
                }
                Ok(r.iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, p)| p != 0.0)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(sparse)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, p)| p).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, p) in self.row(i) {
                row[j] = p;
            }
        }
        d
    }

    /// Row vector times matrix: `out[j] = sum_i v[i] * P[i][j]`.
    pub fn left_mul_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += vi * self.vals[k];
            }
        }
    }

    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.left_mul_into(v, &mut out);
        out
    }

    /// Block `P[S, S]` for the listed (sorted, distinct) indices, renumbered `0..len`.
    pub fn restrict(&self, indices: &[usize]) -> TransitionMatrix {
        let mut local = vec![usize::MAX; self.n];
        for (k, &i) in indices.iter().enumerate() {
            local[i] = k;
        }
        let rows = indices
            .iter()
            .map(|&i| {
                self.row(i)
                    .filter(|&(j, _)| local[j] != usize::MAX)
                    .map(|(j, p)| (local[j], p))
                    .collect()
            })
            .collect();
        Self::from_rows_unchecked(rows).expect("restriction of a valid matrix")
    }

    /// Column sums; all ones for a doubly stochastic matrix.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (&j, &p) in self.cols.iter().zip(&self.vals) {
            s[j] += p;
        }
        s
    }
}

/// Finite chain on `0..n` given directly by its transition matrix.
#[derive(Debug, Clone)]
pub struct MatrixKernel {
    matrix: TransitionMatrix,
    cumulative: Vec<f64>,
}

impl MatrixKernel {
    pub fn new(matrix: TransitionMatrix) -> Result<Self> {
        for i in 0..matrix.n() {
            let s = matrix.row_sum(i);
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::Config(format!("row {i} sums to {s}, not 1")));
            }
        }
        let mut cumulative = Vec::with_capacity(matrix.nnz());
        for i in 0..matrix.n() {
            let mut acc = 0.0;
            for (_, p) in matrix.row(i) {
                acc += p;
                cumulative.push(acc);
            }
        }
        Ok(Self { matrix, cumulative })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(TransitionMatrix::from_dense(rows)?)
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }
}

impl ChainKernel for MatrixKernel {
    type State = usize;

    fn step(&self, x: &usize, rng: &mut RngStream) -> usize {
        let r = self.matrix.row_ptr[*x]..self.matrix.row_ptr[*x + 1];
        let cdf = &self.cumulative[r.clone()];
        // Scale by the row total so rounding in the last partial sum cannot
        // push the draw past the end.
        let u = rng.uniform() * cdf[cdf.len() - 1];
        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        self.matrix.cols[r.start + k]
    }

    fn contains(&self, x: &usize) -> bool {
        *x < self.matrix.n()
    }

    fn finite(&self) -> Option<&dyn FiniteSpace<usize>> {
        Some(self)
    }
}

impl FiniteSpace<usize> for MatrixKernel {
    fn n_states(&self) -> usize {
        self.matrix.n()
    }

    fn index_of(&self, x: &usize) -> Option<usize> {
        (*x < self.matrix.n()).then_some(*x)
    }

    fn state_at(&self, i: usize) -> usize {
        assert!(i < self.matrix.n());
        i
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        self.matrix.row(i).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Context;

    #[test]
    fn identity_chain_matrix() {
        let k = MatrixKernel::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = transition_matrix(&k).unwrap();
        assert_eq!(m.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let mut rng = RngStream::with(0, Context::User, 0, 0);
        assert_eq!(sample_step(&k, &1, &mut rng).unwrap(), 1);
    }

    #[test]
    fn invalid_state_is_a_domain_error() {
        let k = MatrixKernel::from_dense(&[vec![1.0]]).unwrap();
        let mut rng = RngStream::with(0, Context::User, 0, 0);
        assert!(matches!(
            sample_step(&k, &3, &mut rng),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rows_must_be_stochastic() {
        assert!(MatrixKernel::from_dense(&[vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
        assert!(MatrixKernel::from_dense(&[vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn restriction_and_products() {
        let m = TransitionMatrix::from_dense(&[
            vec![0.5, 0.25, 0.25],
            vec![0.0, 0.5, 0.5],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let b = m.restrict(&[0, 2]);
        assert_eq!(b.to_dense(), vec![vec![0.5, 0.25], vec![1.0, 0.0]]);
        assert_eq!(m.left_mul(&[1.0, 0.0, 0.0]), vec![0.5, 0.25, 0.25]);
        assert_eq!(m.get(1, 2), 0.5);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.column_sums(), vec![1.5, 0.75, 0.75]);
    }

    #[test]
    fn non_finite_kernel_has_no_matrix() {
        struct Walk;
        impl ChainKernel for Walk {
            type State = i64;
            fn step(&self, x: &i64, rng: &mut RngStream) -> i64 {
                if rng.uniform() < 0.5 {
                    x - 1
                } else {
                    x + 1
                }
            }
            fn contains(&self, _: &i64) -> bool {
                true
            }
        }
        assert!(matches!(
            transition_matrix(&Walk),
            Err(Error::Unsupported(_))
        ));
    }
}
