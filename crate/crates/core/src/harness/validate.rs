//! Reference values for the built-in models and a fast invariant suite.

use std::time::Instant;

use crate::chain::{transition_matrix, ChainKernel};
use crate::distribution::{compensated_sum, total_variation, FiniteDistribution};
use crate::engine::{check_accounting, Initial, ParRep, ParRepConfig};
use crate::error::{Error, Result};
use crate::metastable::MetastableCollection;
use crate::models::toy::idealized_six_state;
use crate::models::{
    detailed_balance_residual, equilibrium_averages, exact_equilibrium, propagate_extended_law,
    propagate_law, stationarity_residual, BiasedWalk, EntropicWalk, ReferenceValues,
};
use crate::observable::Observable;
use crate::qsd::{exact_qsd_detailed, qsd_residual};
use crate::tolerances::{DETAILED_BALANCE_TOL, FIXED_POINT_TOL, SUM_TOL};

use super::config::ModelKind;
use super::experiment::{load_matrix, matrix_observables};

fn reference_for<K: ChainKernel>(
    model: &str,
    kernel: &K,
    coll: &MetastableCollection<K::State>,
    observables: &[Observable<K::State>],
    with_qsd: bool,
) -> Result<ReferenceValues> {
    let pi = exact_equilibrium(kernel)?;
    let avg = equilibrium_averages(kernel, &pi, observables)?;
    let mut values: Vec<(String, f64)> = observables
        .iter()
        .zip(avg)
        .map(|(o, v)| (o.name().to_string(), v))
        .collect();
    if with_qsd {
        for id in coll.ids() {
            let q = exact_qsd_detailed(kernel, coll, id)?;
            values.push((format!("escape.{}", coll.name(id)), q.escape));
            values.push((
                format!("mass.{}", coll.name(id)),
                compensated_sum(q.members.iter().map(|&i| pi.get(i))),
            ));
        }
    }
    Ok(ReferenceValues {
        model: model.to_string(),
        values,
    })
}

/// Equilibrium averages of a built-in model's observables, and with
/// `with_qsd` also each set's QSD escape probability and equilibrium mass.
/// The entropic right box QSD takes minutes.
pub fn model_reference(model: ModelKind, with_qsd: bool) -> Result<ReferenceValues> {
    match model {
        ModelKind::Entropic => reference_for(
            "entropic",
            &EntropicWalk,
            &EntropicWalk::collection(1, 1, 1, 1)?,
            &EntropicWalk::observables(),
            with_qsd,
        ),
        ModelKind::Biased => reference_for(
            "biased",
            &BiasedWalk,
            &BiasedWalk::collection([1; 3], [1; 3])?,
            &BiasedWalk::observables(),
            with_qsd,
        ),
        ModelKind::Matrix => Err(Error::Config("matrix models need a config file".into())),
    }
}

/// Reference values for the model of an experiment config.
pub fn config_reference(cfg: &super::ExperimentConfig, with_qsd: bool) -> Result<ReferenceValues> {
    if cfg.model != ModelKind::Matrix {
        return model_reference(cfg.model, with_qsd);
    }
    let kernel = load_matrix(cfg.matrix_file.as_ref().expect("validated"))?;
    let n = kernel.matrix().n();
    let coll = cfg
        .sets
        .iter()
        .try_fold(MetastableCollection::new(), |c, (name, idx)| {
            c.with_indices(name.clone(), 1, 1, n, idx)
        })?;
    coll.validate(&kernel)?;
    reference_for(
        "matrix",
        &kernel,
        &coll,
        &matrix_observables(&cfg.sets, n),
        with_qsd,
    )
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({}) [{:.2}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let t = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        name,
        pass,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

fn run_biased(seed: u64, trace: bool) -> Result<crate::engine::RunOutput<usize>> {
    let coll = BiasedWalk::collection([30, 30, 20], [30, 30, 20])?;
    let obs = BiasedWalk::observables();
    let config = ParRepConfig {
        replicas: 8,
        t_poll: 3,
        stop_t_sim: 200_000,
        trace,
        ..ParRepConfig::default()
    };
    ParRep::new(&BiasedWalk, &coll, config, &obs)?.run(&Initial::State(1), seed)
}

/// Deterministic and short statistical checks of the model and engine
/// invariants. Takes a few seconds.
pub fn validate_suite() -> Vec<Check> {
    vec![
        check("entropic kernel is doubly stochastic", || {
            let m = transition_matrix(&EntropicWalk)?;
            let rows = (0..m.n())
                .map(|i| (m.row_sum(i) - 1.0).abs())
                .fold(0.0, f64::max);
            let cols = m
                .column_sums()
                .iter()
                .map(|c| (c - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((
                rows <= SUM_TOL && cols <= SUM_TOL,
                format!("max row dev {rows:.1e}, col dev {cols:.1e}"),
            ))
        }),
        check("entropic equilibrium averages", || {
            let pi = exact_equilibrium(&EntropicWalk)?;
            let a = equilibrium_averages(&EntropicWalk, &pi, &EntropicWalk::observables())?;
            let ok = (a[0] - 70.3).abs() < 1e-9
                && (a[1] - 70.3).abs() < 1e-9
                && (a[2] - 0.4).abs() < 1e-12;
            Ok((
                ok,
                format!("<x>={:.12} <y>={:.12} <f>={:.12}", a[0], a[1], a[2]),
            ))
        }),
        check("biased equilibrium is reversible and stationary", || {
            let m = transition_matrix(&BiasedWalk)?;
            let pi = exact_equilibrium(&BiasedWalk)?;
            let db = detailed_balance_residual(&m, pi.weights());
            let st = stationarity_residual(&m, pi.weights());
            Ok((
                db <= DETAILED_BALANCE_TOL && st <= 1e-12,
                format!("detailed balance {db:.1e}, stationarity {st:.1e}"),
            ))
        }),
        check("biased sets are disjoint and non-absorbing", || {
            let d = BiasedWalk::collection([1; 3], [1; 3])?.validate(&BiasedWalk)?;
            let sizes: Vec<usize> = (0..3)
                .map(|i| d.size(crate::metastable::SetId(i)))
                .collect();
            Ok((sizes == [15, 30, 15], format!("sizes {sizes:?}")))
        }),
        check("biased QSDs are fixed points", || {
            let coll = BiasedWalk::collection([1; 3], [1; 3])?;
            let mut worst: f64 = 0.0;
            for id in coll.ids() {
                let q = exact_qsd_detailed(&BiasedWalk, &coll, id)?;
                worst = worst.max(qsd_residual(&BiasedWalk, &coll, id, &q.distribution)?);
            }
            Ok((
                worst <= FIXED_POINT_TOL,
                format!("max residual {worst:.1e}"),
            ))
        }),
        check("extended process marginal equals the chain law", || {
            let (k, coll) = idealized_six_state(3)?;
            let xi = FiniteDistribution::uniform(6);
            let mut worst: f64 = 0.0;
            for n in [0, 1, 2, 3, 5, 10, 50, 200] {
                let a = propagate_extended_law(&k, &coll, &xi, n)?;
                let b = propagate_law(&k, &xi, n)?;
                worst = worst.max(total_variation(a.weights(), b.weights()));
            }
            Ok((worst <= 1e-12, format!("max TV {worst:.1e}")))
        }),
        check("run accounting identities", || {
            let out = run_biased(11, true)?;
            check_accounting(&out.acc, out.trace.as_deref().unwrap_or(&[]), 3)?;
            Ok((
                true,
                format!("T_sim={} wall={}", out.acc.t_sim, out.acc.wall_clock),
            ))
        }),
        check("runs are reproducible across pool sizes", || {
            let pool = |n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))
            };
            let a = pool(1)?.install(|| run_biased(5, false))?;
            let b = pool(4)?.install(|| run_biased(5, false))?;
            let same = a.acc == b.acc && a.final_state == b.final_state;
            Ok((same, format!("T_sim {} vs {}", a.acc.t_sim, b.acc.t_sim)))
        }),
        check("constant observable estimates itself", || {
            let coll = BiasedWalk::collection([30, 30, 20], [30, 30, 20])?;
            let obs = [
                Observable::constant("one", 1.0),
                Observable::constant("zero", 0.0),
            ];
            let config = ParRepConfig {
                replicas: 4,
                stop_t_sim: 50_000,
                ..ParRepConfig::default()
            };
            let e = ParRep::new(&BiasedWalk, &coll, config, &obs)?
                .run(&Initial::State(30), 2)?
                .estimates;
            Ok((e == [1.0, 0.0], format!("{e:?}")))
        }),
    ]
}
