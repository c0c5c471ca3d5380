//! Multi-trial experiments over one swept parameter.

use std::path::Path;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ModelKind};
use crate::chain::{ChainKernel, MatrixKernel};
use crate::distribution::FiniteDistribution;
use crate::engine::{speedup, Initial, ParRep, ParRepConfig};
use crate::error::{Error, Result};
use crate::metastable::{MetastableCollection, SetId};
use crate::models::{BiasedWalk, EntropicWalk};
use crate::observable::Observable;
use crate::qsd::exact_qsd;
use crate::rng::mix64;
use crate::stats::Summary;

/// One ParRep trial at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub sweep: u64,
    pub estimates: Vec<f64>,
    pub t_sim: u64,
    pub wall_clock: u64,
    pub speedup: f64,
    pub n_decorr: u64,
    pub n_par_steps: u64,
    pub n_par_loops: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub sweep: u64,
    pub estimates: Vec<Summary>,
    pub speedup: Summary,
    pub n_decorr: Summary,
    pub n_par_steps: Summary,
    pub n_par_loops: Summary,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub observables: Vec<String>,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SweepSummary>,
}

/// Seed of trial `trial`: `mix64(master ^ mix64(trial + 1))`, with `mix64`
/// the SplitMix64 finalizer. The same trial index gets the same seed at
/// every sweep value.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    mix64(master ^ mix64(trial as u64 + 1))
}

/// Everything that varies with the sweep value.
pub struct SweepPoint<S> {
    pub value: u64,
    pub replicas: usize,
    pub coll: MetastableCollection<S>,
}

/// Runs `trials` ParRep trials at every sweep point, in parallel over
/// (point, trial) pairs. Records come back ordered by point, then trial.
#[allow(clippy::too_many_arguments)]
pub fn run_trials<K: ChainKernel>(
    kernel: &K,
    points: &[SweepPoint<K::State>],
    observables: &[Observable<K::State>],
    initial: &Initial<K::State>,
    base: &ParRepConfig,
    qsds: &[(SetId, FiniteDistribution)],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<TrialRecord>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    jobs.par_iter()
        .map(|&(p, trial)| {
            let point = &points[p];
            let config = ParRepConfig {
                replicas: point.replicas,
                ..base.clone()
            };
            let mut engine = ParRep::new(kernel, &point.coll, config, observables)?;
            for (set, nu) in qsds {
                engine = engine.with_qsd(*set, nu)?;
            }
            let seed = trial_seed(master_seed, trial);
            let out = engine.run(initial, seed)?;
            let record = TrialRecord {
                trial,
                sweep: point.value,
                estimates: out.estimates,
                t_sim: out.acc.t_sim,
                wall_clock: out.acc.wall_clock,
                speedup: speedup(&out.acc)?,
                n_decorr: out.acc.n_decorr_steps,
                n_par_steps: out.acc.n_parallel_steps,
                n_par_loops: out.acc.n_parallel_loops,
                seed,
            };
            if record.estimates.iter().any(|e| !e.is_finite()) {
                return Err(Error::Precondition(format!(
                    "non-finite estimate in trial {trial}"
                )));
            }
            Ok(record)
        })
        .collect()
}

/// Mean and standard deviation per sweep value, in first-seen order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SweepSummary> {
    let mut values: Vec<u64> = Vec::new();
    for r in records {
        if !values.contains(&r.sweep) {
            values.push(r.sweep);
        }
    }
    values
        .into_iter()
        .map(|v| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.sweep == v).collect();
            let k = rs.first().map_or(0, |r| r.estimates.len());
            let col = |f: &dyn Fn(&TrialRecord) -> f64| {
                Summary::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SweepSummary {
                sweep: v,
                estimates: (0..k).map(|i| col(&|r| r.estimates[i])).collect(),
                speedup: col(&|r| r.speedup),
                n_decorr: col(&|r| r.n_decorr as f64),
                n_par_steps: col(&|r| r.n_par_steps as f64),
                n_par_loops: col(&|r| r.n_par_loops as f64),
            }
        })
        .collect()
}

/// Reads a dense transition matrix: the first non-comment line is the
/// number of states `n`, followed by `n` rows of `n` probabilities.
/// `#` starts a comment.
pub fn load_matrix(path: &Path) -> Result<MatrixKernel> {
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty matrix file".into()))?;
    let n: usize = header.parse().map_err(|_| {
        err(
            first,
            format!("expected the number of states, got {header:?}"),
        )
    })?;
    if n == 0 {
        return Err(err(first, "matrix needs at least one state".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for (lineno, line) in lines {
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| err(lineno, format!("bad entry {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(err(
                lineno,
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(err(0, format!("expected {n} rows, found {}", rows.len())));
    }
    MatrixKernel::from_dense(&rows).map_err(|e| match e {
        Error::Domain(m) | Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Observables of a matrix model: the state index `x` and `in_<set>` per set.
pub fn matrix_observables(sets: &[(String, Vec<usize>)], n: usize) -> Vec<Observable<usize>> {
    let mut obs = vec![Observable::new("x", |x: &usize| *x as f64)];
    for (name, members) in sets {
        let mut bits = vec![false; n];
        for &m in members {
            if m < n {
                bits[m] = true;
            }
        }
        obs.push(Observable::new(format!("in_{name}"), move |x: &usize| {
            if bits.get(*x).copied().unwrap_or(false) {
                1.0
            } else {
                0.0
            }
        }));
    }
    obs
}

fn base_config(cfg: &ExperimentConfig) -> ParRepConfig {
    ParRepConfig {
        t_poll: cfg.t_poll,
        dephasing: cfg.dephasing,
        stop_t_sim: cfg.stop_t_sim,
        idealized: cfg.idealized,
        ..ParRepConfig::default()
    }
}

fn precompute_qsds<K: ChainKernel>(
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    base: &ParRepConfig,
) -> Result<Vec<(SetId, FiniteDistribution)>> {
    if base.effective_dephasing() != crate::engine::DephasingMode::Exact {
        return Ok(Vec::new());
    }
    coll.ids()
        .map(|id| Ok((id, exact_qsd(kernel, coll, id)?)))
        .collect()
}

fn execute<K: ChainKernel>(
    cfg: &ExperimentConfig,
    kernel: &K,
    build: impl Fn(u64) -> Result<MetastableCollection<K::State>>,
    observables: Vec<Observable<K::State>>,
    initial: K::State,
) -> Result<ExperimentResult> {
    let points = cfg
        .sweep_values
        .iter()
        .map(|&v| {
            let (replicas, base) = cfg.point(v);
            Ok(SweepPoint {
                value: v,
                replicas,
                coll: build(base)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = base_config(cfg);
    let qsds = precompute_qsds(kernel, &points[0].coll, &base)?;
    let records = run_trials(
        kernel,
        &points,
        &observables,
        &Initial::State(initial),
        &base,
        &qsds,
        cfg.trials,
        cfg.seed,
    )?;
    Ok(ExperimentResult {
        observables: observables.iter().map(|o| o.name().to_string()).collect(),
        summaries: summarize(&records),
        records,
    })
}

fn initial_coords(cfg: &ExperimentConfig, dims: usize, default: &[i64]) -> Result<Vec<i64>> {
    let v = cfg.initial.clone().unwrap_or_else(|| default.to_vec());
    if v.len() != dims {
        return Err(Error::Config(format!(
            "initial: model {} expects {dims} coordinate(s)",
            cfg.model.name()
        )));
    }
    Ok(v)
}

/// Runs every trial of `cfg` on the current rayon pool. Does not write the
/// CSV; see [`super::emit_csv`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let bad_initial =
        |v: &[i64]| Error::Config(format!("initial state {v:?} is not in the state space"));
    match cfg.model {
        ModelKind::Entropic => {
            let v = initial_coords(cfg, 2, &[-50, -50])?;
            let x = (v[0] as i32, v[1] as i32);
            if !EntropicWalk.contains(&x) {
                return Err(bad_initial(&v));
            }
            execute(
                cfg,
                &EntropicWalk,
                |b| {
                    let (c1, p1) = cfg.times("S1", b);
                    let (c2, p2) = cfg.times("S2", b);
                    EntropicWalk::collection(c1, p1, c2, p2)
                },
                EntropicWalk::observables(),
                x,
            )
        }
        ModelKind::Biased => {
            let v = initial_coords(cfg, 1, &[1])?;
            let x = usize::try_from(v[0]).map_err(|_| bad_initial(&v))?;
            if !BiasedWalk.contains(&x) {
                return Err(bad_initial(&v));
            }
            execute(
                cfg,
                &BiasedWalk,
                |b| {
                    let t: Vec<(u64, u64)> =
                        ["S1", "S2", "S3"].iter().map(|s| cfg.times(s, b)).collect();
                    BiasedWalk::collection([t[0].0, t[1].0, t[2].0], [t[0].1, t[1].1, t[2].1])
                },
                BiasedWalk::observables(),
                x,
            )
        }
        ModelKind::Matrix => {
            let path = cfg.matrix_file.as_ref().expect("validated");
            let kernel = load_matrix(path)?;
            let n = kernel.matrix().n();
            let v = initial_coords(cfg, 1, &[0])?;
            let x = usize::try_from(v[0]).map_err(|_| bad_initial(&v))?;
            if x >= n {
                return Err(bad_initial(&v));
            }
            let observables = matrix_observables(&cfg.sets, n);
            execute(
                cfg,
                &kernel,
                |b| {
                    cfg.sets
                        .iter()
                        .try_fold(MetastableCollection::new(), |c, (name, idx)| {
                            let (tc, tp) = cfg.times(name, b);
                            c.with_indices(name.clone(), tc, tp, n, idx)
                        })
                },
                observables,
                x,
            )
        }
    }
}
