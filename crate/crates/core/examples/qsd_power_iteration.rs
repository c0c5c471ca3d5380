//! Exact quasistationary distributions of the biased walk's three wells, and
//! how fast the conditioned law of a walk started at a point approaches them.
//! The middle well is bipartite, so the plain conditioned law oscillates
//! there; holding a fraction of the mass at each step removes the period.
//!
//! cargo run --release --example qsd_power_iteration

use parrep::distribution::FiniteDistribution;
use parrep::models::BiasedWalk;
use parrep::qsd::{exact_qsd_detailed, qsd_residual};
use parrep::transition_matrix;

fn main() -> parrep::Result<()> {
    let sets = BiasedWalk::collection([90, 90, 60], [90, 90, 60])?;
    let matrix = transition_matrix(&BiasedWalk)?;
    for id in sets.ids() {
        let q = exact_qsd_detailed(&BiasedWalk, &sets, id)?;
        let r = qsd_residual(&BiasedWalk, &sets, id, &q.distribution)?;
        println!(
            "{}: {} states, escape probability {:.6e}, mean exit time {:.0}, residual {r:.1e} after {} iterations",
            sets.name(id),
            q.members.len(),
            q.escape,
            1.0 / q.escape,
            q.iterations
        );

        // Conditioned law after n steps from the left end of the well, plain
        // and with holding probability 0.1.
        let start = q.members[0];
        let mut plain = FiniteDistribution::point(matrix.n(), start).into_weights();
        let mut held = plain.clone();
        for n in 1..=200 {
            plain = conditioned_step(&matrix.left_mul(&plain), &q.members, &plain, 0.0);
            held = conditioned_step(&matrix.left_mul(&held), &q.members, &held, 0.1);
            if n % 40 == 0 {
                let tv = |w: &[f64]| {
                    q.distribution
                        .total_variation(&FiniteDistribution::new(w.to_vec()).unwrap())
                };
                println!(
                    "  from index {start}, n = {n:3}: TV to QSD {:.2e} plain, {:.2e} held",
                    tv(&plain),
                    tv(&held)
                );
            }
        }
    }
    Ok(())
}

/// Restricts `pushed` to the set, renormalizes, and mixes in `hold` of `prev`.
fn conditioned_step(pushed: &[f64], members: &[usize], prev: &[f64], hold: f64) -> Vec<f64> {
    let mut out = vec![0.0; pushed.len()];
    let total: f64 = members.iter().map(|&i| pushed[i]).sum();
    for &i in members {
        out[i] = hold * prev[i] + (1.0 - hold) * pushed[i] / total;
    }
    out
}
