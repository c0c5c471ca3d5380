use parrep::chain::transition_matrix;
use parrep::distribution::{total_variation, FiniteDistribution};
use parrep::engine::Initial;
use parrep::metastable::MetastableCollection;
use parrep::models::toy::{generic_six_state, idealized_six_state};
use parrep::models::{
    detailed_balance_residual, equilibrium_averages, exact_equilibrium, propagate_extended_law,
    propagate_law, serial_estimate, stationarity_residual, BiasedWalk, EntropicWalk, ExtendedChain,
};
use parrep::rng::{Context, RngStream};
use parrep::stats::Summary;
use parrep::tolerances::{DETAILED_BALANCE_TOL, SUM_TOL};
use parrep::{ChainKernel, Error, Observable};

// Equilibrium averages of the biased walk from the detailed-balance
// recurrence evaluated in exact rational arithmetic.
const BIASED_MEAN_X: f64 = 27.51579676034853;
const BIASED_MEAN_F: f64 = 0.40052655867828424;

#[test]
fn entropic_passages_and_walls() {
    assert_eq!(EntropicWalk::propose(&(-1, -1), 3), (1, 1));
    assert_eq!(EntropicWalk::propose(&(-1, -100), 3), (1, 100));
    assert_eq!(EntropicWalk::propose(&(1, 1), 2), (-1, -1));
    assert_eq!(EntropicWalk::propose(&(1, 100), 2), (-1, -100));
    assert_eq!(EntropicWalk::propose(&(-1, -50), 3), (-1, -50));
    assert_eq!(EntropicWalk::propose(&(1, 50), 2), (1, 50));
    assert_eq!(EntropicWalk::propose(&(-100, -50), 2), (-100, -50));
    assert_eq!(EntropicWalk::propose(&(200, 200), 0), (200, 200));
    let dirs: Vec<_> = (0..4)
        .map(|d| EntropicWalk::propose(&(50, 50), d))
        .collect();
    assert_eq!(dirs, vec![(50, 51), (50, 49), (49, 50), (51, 50)]);
}

#[test]
fn entropic_kernel_is_doubly_stochastic_with_uniform_equilibrium() {
    let m = transition_matrix(&EntropicWalk).unwrap();
    assert_eq!(m.n(), 50_000);
    for c in m.column_sums() {
        assert!((c - 1.0).abs() <= SUM_TOL);
    }
    let pi = exact_equilibrium(&EntropicWalk).unwrap();
    assert!(pi.weights().iter().all(|&w| w == 1.0 / 50_000.0));
}

#[test]
fn entropic_averages_match_enumeration() {
    // Direct integer enumeration of both boxes.
    let (mut sx, mut sy, mut upper) = (0i64, 0i64, 0i64);
    for a in 1..=100 {
        for b in 1..=100 {
            sx -= a;
            sy -= b;
        }
    }
    for a in 1..=200 {
        for b in 1..=200 {
            sx += a;
            sy += b;
            upper += i64::from(b >= 101);
        }
    }
    let n = 50_000.0;
    let exact = [sx as f64 / n, sy as f64 / n, upper as f64 / n];
    assert_eq!(exact, [70.3, 70.3, 0.4]);
    let pi = exact_equilibrium(&EntropicWalk).unwrap();
    let got = equilibrium_averages(&EntropicWalk, &pi, &EntropicWalk::observables()).unwrap();
    for (g, e) in got.iter().zip(exact) {
        assert!((g - e).abs() < 1e-12, "{g} vs {e}");
    }
    let all = [Observable::new("in_space", |s: &(i32, i32)| {
        f64::from(EntropicWalk.contains(s))
    })];
    assert!((equilibrium_averages(&EntropicWalk, &pi, &all).unwrap()[0] - 1.0).abs() < 1e-12);
}

#[test]
fn biased_rows() {
    let m = transition_matrix(&BiasedWalk).unwrap();
    assert_eq!(m.get(44, 43), 0.65);
    assert_eq!(m.get(59, 59), 0.65);
    assert_eq!(m.get(59, 58), 0.35);
    assert_eq!(m.get(15, 14), 0.4);
    assert_eq!(m.get(0, 0), 0.6);
    let self_loops: Vec<usize> = (0..60).filter(|&i| m.get(i, i) > 0.0).collect();
    assert_eq!(self_loops, vec![0, 59]);
}

#[test]
fn biased_equilibrium_matches_power_iteration_and_exact_values() {
    let m = transition_matrix(&BiasedWalk).unwrap();
    let pi = exact_equilibrium(&BiasedWalk).unwrap();
    assert!(detailed_balance_residual(&m, pi.weights()) <= DETAILED_BALANCE_TOL);
    assert!(stationarity_residual(&m, pi.weights()) <= 1e-12);

    // Independent check: every row of ((I + P) / 2)^(2^60) is the equilibrium
    // law. The holding removes the near-period-two oscillation of the walk.
    let mut d = m.to_dense();
    for (i, row) in d.iter_mut().enumerate() {
        row.iter_mut().for_each(|p| *p *= 0.5);
        row[i] += 0.5;
    }
    for _ in 0..60 {
        let mut sq = vec![vec![0.0; 60]; 60];
        for i in 0..60 {
            for k in 0..60 {
                for j in 0..60 {
                    sq[i][j] += d[i][k] * d[k][j];
                }
            }
        }
        for row in sq.iter_mut() {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= s);
        }
        d = sq;
    }
    for row in [&d[0], &d[30], &d[59]] {
        assert!(total_variation(row, pi.weights()) < 1e-10);
    }

    let avg = equilibrium_averages(&BiasedWalk, &pi, &BiasedWalk::observables()).unwrap();
    assert!((avg[0] - BIASED_MEAN_X).abs() < 1e-12, "{}", avg[0]);
    assert!((avg[1] - BIASED_MEAN_F).abs() < 1e-12, "{}", avg[1]);
}

#[test]
fn serial_baseline() {
    let obs = [Observable::constant("c", 2.5)];
    assert_eq!(
        serial_estimate(&BiasedWalk, &obs, &Initial::State(7), 1000, 1).unwrap(),
        vec![2.5]
    );
    let x = [Observable::new("x", |x: &usize| *x as f64)];
    assert_eq!(
        serial_estimate(&BiasedWalk, &x, &Initial::State(7), 1, 1).unwrap(),
        vec![7.0]
    );
    assert!(serial_estimate(&BiasedWalk, &x, &Initial::State(7), 0, 1).is_err());

    let obs = BiasedWalk::observables();
    let runs: Vec<Vec<f64>> = (0..10)
        .map(|s| serial_estimate(&BiasedWalk, &obs, &Initial::State(1), 10_000_000, s).unwrap())
        .collect();
    for (i, exact) in [BIASED_MEAN_X, BIASED_MEAN_F].into_iter().enumerate() {
        let s = Summary::of(&runs.iter().map(|r| r[i]).collect::<Vec<_>>());
        let z = (s.mean - exact) / s.std_error();
        assert!(z.abs() <= 3.0, "observable {i}: mean {} z {z}", s.mean);
    }
}

// The toy chain reaches its QSD after one surviving step, so the identity
// needs T_corr >= 2; with T_corr = 1 rule 2 would replace the entry state.
#[test]
fn extended_law_equals_chain_law_in_the_idealized_setting() {
    for t_corr in [2, 3, 5, 8] {
        let (k, coll) = idealized_six_state(t_corr).unwrap();
        let mut rng = RngStream::with(t_corr, Context::User, 0, 0);
        let mut xis = vec![
            FiniteDistribution::uniform(6),
            FiniteDistribution::point(6, 2),
        ];
        let raw: Vec<f64> = (0..6).map(|_| rng.uniform()).collect();
        xis.push(FiniteDistribution::normalized(raw).unwrap());
        for xi in &xis {
            let chain = ExtendedChain::new(&k, &coll).unwrap();
            let mut ext = chain.initial(xi).unwrap();
            let mut law = xi.weights().to_vec();
            let m = transition_matrix(&k).unwrap();
            for n in 0..=200 {
                let tv = total_variation(&chain.marginal(&ext), &law);
                assert!(tv <= 1e-12, "T_corr={t_corr} n={n}: TV {tv}");
                ext = chain.step(&ext);
                law = m.left_mul(&law);
            }
        }
    }
}

#[test]
fn extended_law_detects_non_idealized_chains() {
    let (k, coll) = generic_six_state(3).unwrap();
    let xi = FiniteDistribution::point(6, 2);
    let worst = (0..60)
        .map(|n| {
            let a = propagate_extended_law(&k, &coll, &xi, n).unwrap();
            let b = propagate_law(&k, &xi, n).unwrap();
            total_variation(a.weights(), b.weights())
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-4, "worst TV {worst}");
}

#[test]
fn replacing_entry_states_breaks_the_identity() {
    let (k, coll) = idealized_six_state(1).unwrap();
    let xi = FiniteDistribution::point(6, 2);
    let a = propagate_extended_law(&k, &coll, &xi, 2).unwrap();
    let b = propagate_law(&k, &xi, 2).unwrap();
    assert!(total_variation(a.weights(), b.weights()) > 1e-3);
}

#[test]
fn extended_law_trivial_cases() {
    let (k, coll) = generic_six_state(250).unwrap();
    let xi = FiniteDistribution::uniform(6);
    assert_eq!(propagate_extended_law(&k, &coll, &xi, 0).unwrap(), xi);
    for n in [1, 10, 200] {
        let a = propagate_extended_law(&k, &coll, &xi, n).unwrap();
        let b = propagate_law(&k, &xi, n).unwrap();
        assert!(total_variation(a.weights(), b.weights()) <= 1e-12);
    }
}

#[test]
fn extended_chain_capacity() {
    let coll = EntropicWalk::collection(1, 1, 1, 1).unwrap();
    assert!(matches!(
        ExtendedChain::new(&EntropicWalk, &coll),
        Err(Error::Capacity { .. })
    ));
    let big = MetastableCollection::new()
        .with_indices("S", 200, 200, 61, &[30])
        .unwrap();
    assert!(matches!(
        ExtendedChain::new(&BiasedWalk, &big),
        Err(Error::Capacity { .. })
    ));
}
