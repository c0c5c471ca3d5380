//! Accelerated exits from exact QSD samples: the concatenated exit time is
//! geometric with the QSD escape probability whatever the replica count.
//!
//! cargo run --release --example exit_law -- [steps]

use parrep::engine::parallel_step;
use parrep::models::BiasedWalk;
use parrep::qsd::{dephase_exact, exact_qsd_detailed, StateSampler};
use parrep::rng::{Context, StreamFamily};
use parrep::stats::{geometric_gof, Summary};

fn main() -> parrep::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .map_or(2000, |a| a.parse().expect("integer"));
    let sets = BiasedWalk::collection([90, 90, 60], [90, 90, 60])?;
    let s2 = sets.id_of("S2").expect("S2");
    let q = exact_qsd_detailed(&BiasedWalk, &sets, s2)?;
    let sampler = StateSampler::new(&BiasedWalk, &q.distribution)?;
    println!(
        "S2 escape probability {:.4e}, 1/p = {:.0}",
        q.escape,
        1.0 / q.escape
    );

    for n in [1, 4, 16, 64] {
        let mut taus = Vec::new();
        let mut left = 0;
        let mut loops = 0;
        for i in 0..steps {
            let streams = StreamFamily::new(n as u64, i);
            let samples =
                dephase_exact(&sampler, n, &mut streams.stream(Context::Dephasing, 0)).samples;
            let ev = parallel_step(&BiasedWalk, &sets, s2, &samples, 1, &[], streams)?;
            taus.push(ev.tau_acc);
            left += usize::from(ev.x_acc < 16);
            loops += ev.loops;
        }
        let s = Summary::of(&taus.iter().map(|&t| t as f64).collect::<Vec<_>>());
        let gof = geometric_gof(&taus, q.escape, 10);
        println!(
            "N={n:3}: mean tau_acc {:.0} ± {:.0}, exits to the left {:.3}, mean loops {:.0}, geometric fit p-value {:.3}",
            s.mean,
            s.std_error(),
            left as f64 / steps as f64,
            loops as f64 / steps as f64,
            gof.p_value
        );
    }
    Ok(())
}
