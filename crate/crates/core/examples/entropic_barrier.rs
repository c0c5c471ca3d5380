//! ParRep on the two-box entropic walk: averages of x, y and f = 1{y > 100}
//! against their exact values 70.3, 70.3 and 0.4.
//!
//! cargo run --release --example entropic_barrier -- [T_corr(S1)] [N] [stop_T_sim] [trials]

use std::time::Instant;

use parrep::engine::{Initial, ParRep, ParRepConfig};
use parrep::models::EntropicWalk;
use parrep::stats::Summary;

fn main() -> parrep::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let t1 = args.first().copied().unwrap_or(3000);
    let n = args.get(1).copied().unwrap_or(100) as usize;
    let stop = args.get(2).copied().unwrap_or(10_000_000);
    let trials = args.get(3).copied().unwrap_or(4);

    // T_phase = T_corr and T_corr(S2) = 4 T_corr(S1).
    let sets = EntropicWalk::collection(t1, t1, 4 * t1, 4 * t1)?;
    let observables = EntropicWalk::observables();
    let config = ParRepConfig {
        replicas: n,
        stop_t_sim: stop,
        ..ParRepConfig::default()
    };

    let mut estimates = vec![Vec::new(); 3];
    let mut speedups = Vec::new();
    for trial in 0..trials {
        let start = Instant::now();
        let mut engine = ParRep::new(&EntropicWalk, &sets, config.clone(), &observables)?;
        let out = engine.run(&Initial::State((-50, -50)), trial)?;
        let s = parrep::speedup(&out.acc)?;
        println!(
            "trial {trial}: <x>={:.3} <y>={:.3} <f>={:.4} speedup={s:.2} parallel steps={} ({:.1?})",
            out.estimates[0],
            out.estimates[1],
            out.estimates[2],
            out.acc.n_parallel_steps,
            start.elapsed()
        );
        for (col, e) in estimates.iter_mut().zip(&out.estimates) {
            col.push(*e);
        }
        speedups.push(s);
    }
    for ((name, exact), col) in [("x", 70.3), ("y", 70.3), ("f", 0.4)]
        .iter()
        .zip(&estimates)
    {
        let s = Summary::of(col);
        println!(
            "<{name}> = {:.4} ± {:.4} (exact {exact})",
            s.mean,
            s.std_error()
        );
    }
    println!("mean speedup {:.2}", Summary::of(&speedups).mean);
    Ok(())
}
