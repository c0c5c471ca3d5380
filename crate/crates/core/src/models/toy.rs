//! Small chains for exercising the exact oracles.

use crate::chain::MatrixKernel;
use crate::error::Result;
use crate::metastable::MetastableCollection;

/// Six states, `A = {0, 1}`, `B = {3, 4}`, states 2 and 5 outside.
///
/// Inside each set every row restricted to the set is proportional to the
/// set's QSD (`(0.4, 0.6)` on `A`, `(0.25, 0.75)` on `B`), so one surviving
/// step already lands exactly on the QSD whatever the history.
pub fn idealized_six_state(t_corr: u64) -> Result<(MatrixKernel, MetastableCollection<usize>)> {
    let k = MatrixKernel::from_dense(&[
        vec![0.36, 0.54, 0.10, 0.0, 0.0, 0.0],
        vec![0.32, 0.48, 0.15, 0.0, 0.0, 0.05],
        vec![0.30, 0.0, 0.20, 0.30, 0.0, 0.20],
        vec![0.0, 0.0, 0.15, 0.2125, 0.6375, 0.0],
        vec![0.0, 0.0, 0.0, 0.175, 0.525, 0.30],
        vec![0.0, 0.25, 0.20, 0.0, 0.25, 0.30],
    ])?;
    Ok((k, two_sets(t_corr)?))
}

/// Same graph as [`idealized_six_state`] but with rows that remember where
/// they came from, so finite decorrelation times are not exact.
pub fn generic_six_state(t_corr: u64) -> Result<(MatrixKernel, MetastableCollection<usize>)> {
    let k = MatrixKernel::from_dense(&[
        vec![0.70, 0.20, 0.10, 0.0, 0.0, 0.0],
        vec![0.10, 0.70, 0.15, 0.0, 0.0, 0.05],
        vec![0.30, 0.0, 0.20, 0.30, 0.0, 0.20],
        vec![0.0, 0.0, 0.15, 0.80, 0.05, 0.0],
        vec![0.0, 0.0, 0.0, 0.10, 0.60, 0.30],
        vec![0.0, 0.25, 0.20, 0.0, 0.25, 0.30],
    ])?;
    Ok((k, two_sets(t_corr)?))
}

fn two_sets(t_corr: u64) -> Result<MetastableCollection<usize>> {
    MetastableCollection::new()
        .with_indices("A", t_corr, t_corr, 6, &[0, 1])?
        .with_indices("B", t_corr, t_corr, 6, &[3, 4])
}
