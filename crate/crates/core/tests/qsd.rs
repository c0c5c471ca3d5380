use parrep::chain::transition_matrix;
use parrep::distribution::{total_variation, FiniteDistribution};
use parrep::metastable::SetId;
use parrep::models::toy::{generic_six_state, idealized_six_state};
use parrep::models::BiasedWalk;
use parrep::qsd::{
    block_qsd, dephase_exact, dephase_fleming_viot, dephase_rejection, exact_qsd,
    exact_qsd_detailed, qsd_residual, ExtinctionPolicy, StateSampler,
};
use parrep::rng::{Context, RngStream, StreamFamily};
use parrep::stats::{empirical, lag1_autocorrelation};
use parrep::tolerances::FIXED_POINT_TOL;
use parrep::FiniteSpace;

fn biased_sets() -> parrep::MetastableCollection<usize> {
    BiasedWalk::collection([1; 3], [1; 3]).unwrap()
}

/// Dominant left eigenvector of a dense nonnegative matrix by repeated
/// squaring: rows of `Q^(2^k)` all align with it.
fn repeated_squaring_eigenvector(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    let mut m = q.to_vec();
    for _ in 0..40 {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if m[i][k] != 0.0 {
                    for j in 0..n {
                        next[i][j] += m[i][k] * m[k][j];
                    }
                }
            }
        }
        let scale = next.iter().flatten().cloned().fold(0.0, f64::max);
        next.iter_mut().flatten().for_each(|v| *v /= scale);
        m = next;
    }
    let mut v: Vec<f64> = (0..n).map(|j| (0..n).map(|i| m[i][j]).sum()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

#[test]
fn s3_matches_the_repeated_squaring_oracle() {
    let coll = biased_sets();
    let s3 = coll.id_of("S3").unwrap();
    let sol = exact_qsd_detailed(&BiasedWalk, &coll, s3).unwrap();
    assert_eq!(sol.members, (45..60).collect::<Vec<_>>());
    let block = transition_matrix(&BiasedWalk)
        .unwrap()
        .restrict(&sol.members)
        .to_dense();
    let oracle = repeated_squaring_eigenvector(&block);
    let ours: Vec<f64> = sol
        .members
        .iter()
        .map(|&i| sol.distribution.get(i))
        .collect();
    let tv = total_variation(&ours, &oracle);
    assert!(tv < 1e-10, "TV {tv}");
}

#[test]
fn exact_qsds_are_fixed_points() {
    let coll = biased_sets();
    for id in coll.ids() {
        let nu = exact_qsd(&BiasedWalk, &coll, id).unwrap();
        let r = qsd_residual(&BiasedWalk, &coll, id, &nu).unwrap();
        assert!(r <= FIXED_POINT_TOL, "{}: residual {r}", coll.name(id));
    }
    for (k, coll) in [
        idealized_six_state(3).unwrap(),
        generic_six_state(3).unwrap(),
    ] {
        for id in coll.ids() {
            let nu = exact_qsd(&k, &coll, id).unwrap();
            assert!(qsd_residual(&k, &coll, id, &nu).unwrap() <= FIXED_POINT_TOL);
        }
    }
}

#[test]
fn uniform_on_s3_is_not_the_qsd() {
    let coll = biased_sets();
    let s3 = coll.id_of("S3").unwrap();
    let u = FiniteDistribution::uniform_on(60, &(45..60).collect::<Vec<_>>());
    assert!(qsd_residual(&BiasedWalk, &coll, s3, &u).unwrap() > 1e-3);
}

#[test]
fn idealized_toy_qsds_are_the_row_shapes() {
    let (k, coll) = idealized_six_state(3).unwrap();
    let a = exact_qsd(&k, &coll, SetId(0)).unwrap();
    let b = exact_qsd(&k, &coll, SetId(1)).unwrap();
    assert!((a.get(0) - 0.4).abs() < 1e-12 && (a.get(1) - 0.6).abs() < 1e-12);
    assert!((b.get(3) - 0.25).abs() < 1e-12 && (b.get(4) - 0.75).abs() < 1e-12);
}

/// TV distances to the QSD of the conditioned laws
/// `P_mu(X_n in . | X_1..X_n in S)` for n = 1..steps.
fn conditioned_tvs(set: &str, start: &[f64], steps: usize) -> Vec<f64> {
    let coll = biased_sets();
    let id = coll.id_of(set).unwrap();
    let sol = exact_qsd_detailed(&BiasedWalk, &coll, id).unwrap();
    let nu: Vec<f64> = sol
        .members
        .iter()
        .map(|&i| sol.distribution.get(i))
        .collect();
    let block = transition_matrix(&BiasedWalk)
        .unwrap()
        .restrict(&sol.members);
    let mut law = start.to_vec();
    (0..steps)
        .map(|_| {
            law = block.left_mul(&law);
            let s: f64 = law.iter().sum();
            law.iter_mut().for_each(|x| *x /= s);
            total_variation(&law, &nu)
        })
        .collect()
}

fn initial_laws(n: usize) -> Vec<Vec<f64>> {
    let point = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let ramp: Vec<f64> = (1..=n)
        .map(|i| i as f64 / (n * (n + 1) / 2) as f64)
        .collect();
    let mut rev = ramp.clone();
    rev.reverse();
    vec![point(0), point(n - 1), point(n / 2), ramp, rev]
}

#[test]
fn conditioned_laws_converge_to_the_qsd() {
    for (set, n) in [("S1", 15), ("S3", 15)] {
        for mu in initial_laws(n) {
            let tvs = conditioned_tvs(set, &mu, 4000);
            let last = *tvs.last().unwrap();
            assert!(last < 1e-10, "{set}: final TV {last}");
            // Monotone beyond some n (up to rounding once at machine precision).
            let n0 = tvs.len() / 2;
            assert!(
                tvs[n0..].windows(2).all(|w| w[1] <= w[0] + 1e-15),
                "{set}: not monotone after {n0}"
            );
        }
    }
}

#[test]
fn periodic_block_needs_the_holding_iteration() {
    // S2 = {16..45} has no self-loops: the restricted walk alternates parity,
    // so the plain conditioned laws oscillate while the held iteration converges.
    let coll = biased_sets();
    let id = coll.id_of("S2").unwrap();
    let members = coll.members(&BiasedWalk, id).unwrap();
    let block = transition_matrix(&BiasedWalk).unwrap().restrict(&members);
    let mut start = vec![0.0; 30];
    start[0] = 1.0;
    let tvs = conditioned_tvs("S2", &start, 2000);
    assert!(tvs[1999] > 0.1, "plain iteration settled: {}", tvs[1999]);
    let held = block_qsd(&block, Some(&start)).unwrap();
    let nu = exact_qsd(&BiasedWalk, &coll, id).unwrap();
    let ours: Vec<f64> = members.iter().map(|&i| nu.get(i)).collect();
    assert!(total_variation(&held.weights, &ours) < 1e-10);
}

fn qsd_of_s3() -> (parrep::MetastableCollection<usize>, SetId, Vec<f64>) {
    let coll = BiasedWalk::collection([60; 3], [60; 3]).unwrap();
    let id = coll.id_of("S3").unwrap();
    let nu = exact_qsd(&BiasedWalk, &coll, id).unwrap().into_weights();
    (coll, id, nu)
}

fn sample_tv(samples: &[usize], nu: &[f64]) -> f64 {
    total_variation(&empirical(samples.iter().map(|x| x - 1), 60), nu)
}

// Started at the middle of S3. From the entry state 46 the exact conditioned
// law after 60 steps is still 0.074 away from the QSD in TV.
#[test]
fn dephasers_approach_the_qsd() {
    let (coll, id, nu) = qsd_of_s3();
    let streams = StreamFamily::new(3, 0);
    let rej =
        dephase_rejection(&BiasedWalk, &coll, id, 10_000, 60, &53, streams, 1_000_000).unwrap();
    let fv = dephase_fleming_viot(
        &BiasedWalk,
        &coll,
        id,
        10_000,
        60,
        &53,
        streams,
        ExtinctionPolicy::Fail,
    )
    .unwrap();
    assert_eq!(rej.samples.len(), 10_000);
    assert!(rej
        .samples
        .iter()
        .chain(&fv.samples)
        .all(|x| (46..=60).contains(x)));
    assert!(rej.work >= 10_000 * 60);
    assert_eq!(fv.work, 10_000 * 60);
    let (tr, tf) = (sample_tv(&rej.samples, &nu), sample_tv(&fv.samples, &nu));
    assert!(tr < 0.05, "rejection TV {tr}");
    assert!(tf < 0.05, "Fleming-Viot TV {tf}");
}

#[test]
fn longer_dephasing_is_no_worse() {
    let (coll, id, nu) = qsd_of_s3();
    // Binomial noise on TV with 10^4 samples over 15 states is about 0.01.
    let noise = 0.02;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for (i, t) in [5u64, 10, 20, 40, 80].into_iter().enumerate() {
        let streams = StreamFamily::new(17, i as u64);
        let rej =
            dephase_rejection(&BiasedWalk, &coll, id, 10_000, t, &46, streams, 1_000_000).unwrap();
        let fv = dephase_fleming_viot(
            &BiasedWalk,
            &coll,
            id,
            10_000,
            t,
            &46,
            streams,
            ExtinctionPolicy::Fail,
        )
        .unwrap();
        let cur = (sample_tv(&rej.samples, &nu), sample_tv(&fv.samples, &nu));
        assert!(
            cur.0 <= prev.0 + noise,
            "rejection T_phase={t}: {} after {}",
            cur.0,
            prev.0
        );
        assert!(
            cur.1 <= prev.1 + noise,
            "Fleming-Viot T_phase={t}: {} after {}",
            cur.1,
            prev.1
        );
        prev = cur;
    }
}

#[test]
fn exact_sampler_is_accurate_and_iid() {
    let coll = biased_sets();
    let id = coll.id_of("S1").unwrap();
    let nu = exact_qsd(&BiasedWalk, &coll, id).unwrap();
    let sampler = StateSampler::new(&BiasedWalk, &nu).unwrap();
    let mut rng = RngStream::with(8, Context::Dephasing, 0, 0);
    let out = dephase_exact(&sampler, 100_000, &mut rng);
    assert_eq!(out.work, 0);
    let tv = total_variation(
        &empirical(out.samples.iter().map(|x| x - 1), 60),
        nu.weights(),
    );
    assert!(tv < 0.02, "TV {tv}");
    let xs: Vec<f64> = out.samples.iter().map(|&x| x as f64).collect();
    let rho = lag1_autocorrelation(&xs);
    assert!(rho.abs() < 0.02, "lag-1 autocorrelation {rho}");
}

#[test]
fn one_point_set_gives_copies() {
    // Bitset sets are keyed by state value; the biased walk's states are 1..=60.
    let coll = parrep::MetastableCollection::new()
        .with_indices("one", 1, 1, 61, &[60])
        .unwrap();
    let id = SetId(0);
    let nu = exact_qsd(&BiasedWalk, &coll, id).unwrap();
    assert_eq!(nu.get(59), 1.0);
    let sampler = StateSampler::new(&BiasedWalk, &nu).unwrap();
    let out = dephase_exact(
        &sampler,
        5,
        &mut RngStream::with(1, Context::Dephasing, 0, 0),
    );
    assert_eq!(out.samples, vec![60; 5]);
    assert_eq!(BiasedWalk.index_of(&60), Some(59));
}
