//! Speedup and polling-loop counts as the replica count grows.
//!
//! cargo run --release --example replica_scaling

use parrep::engine::{Initial, ParRepConfig};
use parrep::harness::{run_trials, summarize, SweepPoint};
use parrep::models::BiasedWalk;

fn main() -> parrep::Result<()> {
    let points = [1usize, 2, 5, 10, 20, 50, 100]
        .iter()
        .map(|&n| {
            Ok(SweepPoint {
                value: n as u64,
                replicas: n,
                coll: BiasedWalk::collection([90, 90, 60], [90, 90, 60])?,
            })
        })
        .collect::<parrep::Result<Vec<_>>>()?;
    let base = ParRepConfig {
        stop_t_sim: 1_000_000,
        ..ParRepConfig::default()
    };
    let records = run_trials(
        &BiasedWalk,
        &points,
        &BiasedWalk::observables(),
        &Initial::State(1),
        &base,
        &[],
        10,
        5,
    )?;
    println!(
        "{:>5} {:>10} {:>12} {:>14} {:>10}",
        "N", "speedup", "par steps", "par loops", "<f>"
    );
    for s in summarize(&records) {
        println!(
            "{:>5} {:>10.2} {:>12.1} {:>14.0} {:>10.4}",
            s.sweep, s.speedup.mean, s.n_par_steps.mean, s.n_par_loops.mean, s.estimates[1].mean
        );
    }
    Ok(())
}
