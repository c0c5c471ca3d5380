//! ParRep on the biased 60-state walk with three energetic wells, against the
//! exact equilibrium averages of x and f = 1{x > 45}.
//!
//! cargo run --release --example energetic_barrier -- [N] [stop_T_sim] [trials]

use parrep::engine::{Initial, ParRep, ParRepConfig};
use parrep::models::{equilibrium_averages, exact_equilibrium, BiasedWalk};
use parrep::stats::Summary;

fn main() -> parrep::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let n = args.first().copied().unwrap_or(100) as usize;
    let stop = args.get(1).copied().unwrap_or(10_000_000);
    let trials = args.get(2).copied().unwrap_or(5);

    let sets = BiasedWalk::collection([90, 90, 60], [90, 90, 60])?;
    let observables = BiasedWalk::observables();
    let pi = exact_equilibrium(&BiasedWalk)?;
    let exact = equilibrium_averages(&BiasedWalk, &pi, &observables)?;

    let config = ParRepConfig {
        replicas: n,
        stop_t_sim: stop,
        ..ParRepConfig::default()
    };
    let mut cols = vec![Vec::new(); observables.len()];
    for trial in 0..trials {
        let out = ParRep::new(&BiasedWalk, &sets, config.clone(), &observables)?
            .run(&Initial::State(1), trial)?;
        println!(
            "trial {trial}: <x>={:.3} <f>={:.4} speedup={:.2}",
            out.estimates[0],
            out.estimates[1],
            parrep::speedup(&out.acc)?
        );
        for (c, e) in cols.iter_mut().zip(&out.estimates) {
            c.push(*e);
        }
    }
    for ((obs, col), ex) in observables.iter().zip(&cols).zip(&exact) {
        let s = Summary::of(col);
        println!(
            "<{}> = {:.4} ± {:.4} (exact {ex:.6})",
            obs.name(),
            s.mean,
            s.std_error()
        );
    }
    Ok(())
}
