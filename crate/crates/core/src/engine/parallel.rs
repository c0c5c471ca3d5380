use rayon::prelude::*;

use crate::chain::ChainKernel;
use crate::error::{Error, Result};
use crate::metastable::{MetastableCollection, SetId};
use crate::observable::Observable;
use crate::rng::{Context, RngStream, StreamFamily};

/// Accelerated exit produced by one Parallel Step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitEvent<S> {
    /// Length of the concatenated replica trajectory.
    pub tau_acc: u64,
    pub x_acc: S,
    /// Contribution of the concatenated trajectory to each observable sum.
    pub f_contrib: Vec<f64>,
    /// Polling windows used (the loop counter `M`).
    pub loops: u64,
    /// Zero-based index of the replica that defined the exit (`K - 1`).
    pub replica: usize,
    /// First exit time of that replica, counted from the start of the step.
    pub exit_time: u64,
}

/// First round length in chain steps per replica; doubles up to `MAX_ROUND_STEPS`.
const FIRST_ROUND_STEPS: u64 = 256;
const MAX_ROUND_STEPS: u64 = 1 << 16;

/// Adds the first `take` windows of a flattened `k`-per-window buffer.
fn add_windows(f_contrib: &mut [f64], windows: &[f64], take: usize) {
    let k = f_contrib.len();
    if k == 0 {
        return;
    }
    for c in windows.chunks_exact(k).take(take) {
        for (f, v) in f_contrib.iter_mut().zip(c) {
            *f += v;
        }
    }
}

struct Replica<S> {
    x: S,
    rng: RngStream,
    /// Observable sums of the completed windows of the current round,
    /// `k` values per window.
    windows: Vec<f64>,
    /// `(window, time, state, partial sums)` of the first exit.
    exit: Option<(u64, u64, S, Vec<f64>)>,
}

impl<S: Clone> Replica<S> {
    /// Advances through windows `first..first + count` (1-based), stopping at
    /// the first exit.
    fn advance<K: ChainKernel<State = S>>(
        &mut self,
        kernel: &K,
        coll: &MetastableCollection<S>,
        set: SetId,
        observables: &[Observable<S>],
        t_poll: u64,
        first: u64,
        count: u64,
    ) {
        let k = observables.len();
        self.windows.clear();
        let mut sums = vec![0.0; k];
        for w in first..first + count {
            sums.iter_mut().for_each(|s| *s = 0.0);
            for j in 1..=t_poll {
                self.x = kernel.step(&self.x, &mut self.rng);
                for (s, o) in sums.iter_mut().zip(observables) {
                    *s += o.eval(&self.x);
                }
                if !coll.contains(set, &self.x) {
                    let t = (w - 1) * t_poll + j;
                    self.exit = Some((w, t, self.x.clone(), sums));
                    return;
                }
            }
            self.windows.extend_from_slice(&sums);
        }
    }
}

/// Runs N replicas from `samples` in polling windows of `t_poll` steps until
/// a window contains an exit.
///
/// In the first window with an exit, `K` is the smallest replica index that
/// exits (not the earliest exit), and `tau^K` its first exit time. The
/// concatenated trajectory runs through the windows column by column,
/// replicas in index order, and ends at `X^K_{tau^K}`. Replica `i` draws from
/// stream `(Parallel, i)` of `streams`, so the result does not depend on how
/// replicas are scheduled or how many windows are simulated between polls.
pub fn parallel_step<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    set: SetId,
    samples: &[K::State],
    t_poll: u64,
    observables: &[Observable<K::State>],
    streams: StreamFamily,
) -> Result<ExitEvent<K::State>> {
    if samples.is_empty() {
        return Err(Error::Precondition(
            "parallel step needs at least one replica".into(),
        ));
    }
    if t_poll == 0 {
        return Err(Error::Precondition("T_poll must be at least 1".into()));
    }
    if let Some(x) = samples.iter().find(|x| !coll.contains(set, x)) {
        return Err(Error::Precondition(format!(
            "replica start {x:?} not in set {}",
            coll.name(set)
        )));
    }
    let n = samples.len() as u64;
    let k = observables.len();
    let mut replicas: Vec<Replica<K::State>> = samples
        .iter()
        .enumerate()
        .map(|(i, x)| Replica {
            x: x.clone(),
            rng: streams.stream(Context::Parallel, i as u64),
            windows: Vec::new(),
            exit: None,
        })
        .collect();
    let mut f_contrib = vec![0.0; k];
    let mut first = 1u64;
    let mut round_steps = FIRST_ROUND_STEPS;
    loop {
        let count = (round_steps / t_poll).max(1);
        replicas
            .par_iter_mut()
            .for_each(|r| r.advance(kernel, coll, set, observables, t_poll, first, count));

        let Some(m) = replicas
            .iter()
            .filter_map(|r| r.exit.as_ref().map(|e| e.0))
            .min()
        else {
            for r in &replicas {
                add_windows(&mut f_contrib, &r.windows, usize::MAX);
            }
            first += count;
            round_steps = (round_steps * 2).min(MAX_ROUND_STEPS);
            continue;
        };

        let kk = replicas
            .iter()
            .position(|r| r.exit.as_ref().is_some_and(|e| e.0 == m))
            .expect("an exiting replica");
        // Windows of this round strictly before M, for every replica.
        let before = (m - first) as usize;
        for (i, r) in replicas.iter().enumerate() {
            let full = if i < kk { before + 1 } else { before };
            add_windows(&mut f_contrib, &r.windows, full);
        }
        let (_, tau_k, x_acc, partial) = replicas[kk].exit.take().expect("exit recorded");
        for (f, v) in f_contrib.iter_mut().zip(&partial) {
            *f += v;
        }
        let tau_acc = (m - 1) * n * t_poll + kk as u64 * t_poll + (tau_k - (m - 1) * t_poll);
        return Ok(ExitEvent {
            tau_acc,
            x_acc,
            f_contrib,
            loops: m,
            replica: kk,
            exit_time: tau_k,
        });
    }
}
