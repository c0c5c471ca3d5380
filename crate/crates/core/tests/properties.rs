use std::path::Path;

use proptest::prelude::*;

use parrep::chain::{transition_matrix, MatrixKernel};
use parrep::distribution::{total_variation, FiniteDistribution};
use parrep::engine::{
    check_accounting, parallel_step, DephasingMode, Initial, ParRep, ParRepConfig,
};
use parrep::harness::csv::{parse_csv_str, to_csv_string};
use parrep::harness::{ExperimentConfig, TrialRecord};
use parrep::metastable::MetastableCollection;
use parrep::models::{
    exact_equilibrium, propagate_extended_law, propagate_law, stationarity_residual,
};
use parrep::qsd::{dephase_exact, exact_qsd, qsd_residual, StateSampler};
use parrep::rng::{Context, RngStream, StreamFamily};
use parrep::tolerances::{FIXED_POINT_TOL, SUM_TOL};
use parrep::Observable;

fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Strictly positive stochastic matrix of size 3..=8.
fn positive_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..=8).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), n)
            .prop_map(|rows| rows.iter().map(|r| normalize(r)).collect())
    })
}

/// Two sets `A = {0, 1}`, `B = {2, 3}` and outside states, with every
/// in-set row restricted to its set proportional to a fixed vector `q_S`:
/// any surviving step lands exactly on the QSD.
fn idealized_chain() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (
        prop::collection::vec(0.05f64..1.0, 2),
        prop::collection::vec(0.05f64..1.0, 2),
        prop::collection::vec(0.05f64..0.95, 4),
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, 6), 6),
    )
        .prop_map(|(qa, qb, survive, raw)| {
            let (qa, qb) = (normalize(&qa), normalize(&qb));
            (0..6)
                .map(|x| {
                    let r = &raw[x];
                    match x {
                        0 | 1 => {
                            let out = normalize(&r[2..]);
                            let mut row = vec![survive[x] * qa[0], survive[x] * qa[1]];
                            row.extend(out.iter().map(|p| (1.0 - survive[x]) * p));
                            row
                        }
                        2 | 3 => {
                            let out = normalize(&[r[0], r[1], r[4], r[5]]);
                            let s = 1.0 - survive[x];
                            vec![
                                s * out[0],
                                s * out[1],
                                survive[x] * qb[0],
                                survive[x] * qb[1],
                                s * out[2],
                                s * out[3],
                            ]
                        }
                        _ => normalize(r),
                    }
                })
                .collect()
        })
}

fn two_sets(t_corr: u64) -> MetastableCollection<usize> {
    MetastableCollection::new()
        .with_indices("A", t_corr, t_corr, 6, &[0, 1])
        .unwrap()
        .with_indices("B", t_corr, t_corr, 6, &[2, 3])
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_kernels_are_row_stochastic_with_exact_equilibria(rows in positive_matrix()) {
        let k = MatrixKernel::from_dense(&rows).unwrap();
        let m = transition_matrix(&k).unwrap();
        for i in 0..m.n() {
            prop_assert!((m.row_sum(i) - 1.0).abs() <= SUM_TOL);
        }
        let pi = exact_equilibrium(&k).unwrap();
        prop_assert!(stationarity_residual(&m, pi.weights()) <= 1e-12);
    }

    #[test]
    fn random_sets_have_fixed_point_qsds(rows in positive_matrix(), split in 1usize..3) {
        let n = rows.len();
        let k = MatrixKernel::from_dense(&rows).unwrap();
        let members: Vec<usize> = (0..split.min(n - 1)).collect();
        let coll = MetastableCollection::new().with_indices("S", 1, 1, n, &members).unwrap();
        let id = coll.id_of("S").unwrap();
        let nu = exact_qsd(&k, &coll, id).unwrap();
        prop_assert!(qsd_residual(&k, &coll, id, &nu).unwrap() <= FIXED_POINT_TOL);
        prop_assert!(nu.weights().iter().enumerate().all(|(i, &w)| members.contains(&i) || w == 0.0));
    }

    #[test]
    fn locate_is_consistent_with_membership(a in prop::collection::btree_set(0usize..20, 0..10),
                                            b in prop::collection::btree_set(0usize..20, 0..10)) {
        let a: Vec<usize> = a.into_iter().collect();
        let b: Vec<usize> = b.into_iter().filter(|x| !a.contains(x)).collect();
        let coll = MetastableCollection::new()
            .with_indices("A", 1, 1, 20, &a).unwrap()
            .with_indices("B", 1, 1, 20, &b).unwrap();
        for x in 0..20usize {
            let found = coll.locate(&x).unwrap().map(|id| coll.name(id).to_string());
            let expect = if a.contains(&x) { Some("A") } else if b.contains(&x) { Some("B") } else { None };
            prop_assert_eq!(found.as_deref(), expect);
        }
    }

    #[test]
    fn extended_process_matches_the_chain(rows in idealized_chain(), t_corr in 2u64..6, start in 0usize..6) {
        let k = MatrixKernel::from_dense(&rows).unwrap();
        let coll = two_sets(t_corr);
        let xi = FiniteDistribution::point(6, start);
        for n in [0usize, 1, 2, 3, 7, 20, 60] {
            let a = propagate_extended_law(&k, &coll, &xi, n).unwrap();
            let b = propagate_law(&k, &xi, n).unwrap();
            prop_assert!(total_variation(a.weights(), b.weights()) <= 1e-12);
        }
    }

    #[test]
    fn runs_keep_exact_accounting(rows in positive_matrix(), n in 1usize..6, t_poll in 1u64..5,
                                  mode in 0usize..3, t_corr in 1u64..6, seed in any::<u64>()) {
        let size = rows.len();
        // Make both one-state sets sticky so rejection dephasing survives.
        let mut rows = rows;
        for i in [0, size - 1] {
            rows[i].iter_mut().for_each(|p| *p *= 0.2);
            rows[i][i] += 0.8;
        }
        let k = MatrixKernel::from_dense(&rows).unwrap();
        let coll = MetastableCollection::new()
            .with_indices("L", t_corr, t_corr + 1, size, &[0]).unwrap()
            .with_indices("R", t_corr + 1, t_corr, size, &[size - 1]).unwrap();
        let obs = [Observable::constant("one", 1.0), Observable::constant("zero", 0.0)];
        let config = ParRepConfig {
            replicas: n,
            t_poll,
            dephasing: [DephasingMode::Rejection, DephasingMode::FlemingViot, DephasingMode::Exact][mode],
            stop_t_sim: 2_000,
            trace: true,
            ..ParRepConfig::default()
        };
        let out = ParRep::new(&k, &coll, config, &obs).unwrap().run(&Initial::State(1), seed).unwrap();
        prop_assert_eq!(&out.estimates, &vec![1.0, 0.0]);
        prop_assert!(out.acc.t_sim > 2_000);
        check_accounting(&out.acc, out.trace.as_ref().unwrap(), t_poll).unwrap();
    }

    #[test]
    fn exit_events_leave_the_set(rows in positive_matrix(), n in 1usize..9, t_poll in 1u64..7, seed in any::<u64>()) {
        let size = rows.len();
        let k = MatrixKernel::from_dense(&rows).unwrap();
        let coll = MetastableCollection::new().with_indices("S", 1, 1, size, &[0, 1]).unwrap();
        let id = coll.id_of("S").unwrap();
        let nu = exact_qsd(&k, &coll, id).unwrap();
        let sampler = StateSampler::new(&k, &nu).unwrap();
        let samples = dephase_exact(&sampler, n, &mut RngStream::with(seed, Context::Dephasing, 0, 0)).samples;
        let ev = parallel_step(&k, &coll, id, &samples, t_poll, &[], StreamFamily::new(seed, 0)).unwrap();
        prop_assert!(!coll.contains(id, &ev.x_acc));
        prop_assert!(ev.tau_acc >= 1);
        prop_assert!(ev.tau_acc <= ev.loops * n as u64 * t_poll);
        prop_assert!(ev.replica < n);
    }

    #[test]
    fn csv_round_trips(recs in prop::collection::vec(
        (0usize..1000, 1u64..10_000, prop::collection::vec(-1e6f64..1e6, 2), 1u64..u64::MAX / 2,
         1u64..u64::MAX / 2, 0.0f64..1e4, any::<u64>(), any::<u64>()), 0..8)) {
        let records: Vec<TrialRecord> = recs.into_iter().map(|(trial, sweep, estimates, t_sim, wall_clock, speedup, a, seed)| TrialRecord {
            trial, sweep, estimates, t_sim, wall_clock, speedup,
            n_decorr: a % 1000, n_par_steps: a % 777, n_par_loops: a, seed,
        }).collect();
        let names = vec!["x".to_string(), "f".to_string()];
        let text = to_csv_string(&records, &names);
        prop_assert_eq!(text.lines().count(), records.len() + 1);
        let (n, back) = parse_csv_str(&text, Path::new("p.csv")).unwrap();
        prop_assert_eq!(n, names);
        prop_assert_eq!(back, records);
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z_]{3,12}") {
        let known = ["model", "matrix_file", "sweep", "sweep_values", "n", "t_corr_base", "t_corr_scale",
                     "t_phase_scale", "t_poll", "stop_t_sim", "trials", "seed", "dephasing", "idealized",
                     "initial", "output"];
        prop_assume!(!known.contains(&key.as_str()));
        let text = format!("model = biased\nsweep = n\nsweep_values = 2\nt_corr_base = 5\n{key} = 1\n");
        let e = ExperimentConfig::parse(&text, Path::new("."), Path::new("p.cfg")).unwrap_err();
        prop_assert_eq!(e.exit_code(), 2);
    }
}
