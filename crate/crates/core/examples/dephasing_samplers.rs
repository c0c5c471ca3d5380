//! Rejection and Fleming-Viot dephasing on the biased walk's right well,
//! compared with the exact QSD by total variation of the sample histogram.
//!
//! cargo run --release --example dephasing_samplers -- [N]

use parrep::engine::DephasingMode;
use parrep::models::BiasedWalk;
use parrep::qsd::{dephase_fleming_viot, dephase_rejection, exact_qsd, ExtinctionPolicy};
use parrep::rng::StreamFamily;
use parrep::tolerances::REJECTION_RESTART_BUDGET;

fn main() -> parrep::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map_or(20_000, |a| a.parse().expect("integer N"));
    let sets = BiasedWalk::collection([90, 90, 60], [90, 90, 60])?;
    let s3 = sets.id_of("S3").expect("S3");
    let nu = exact_qsd(&BiasedWalk, &sets, s3)?;
    let start = 53;

    for mode in [DephasingMode::Rejection, DephasingMode::FlemingViot] {
        for t_phase in [5, 20, 60, 120] {
            let streams = StreamFamily::new(t_phase, 0);
            let out = match mode {
                DephasingMode::Rejection => dephase_rejection(
                    &BiasedWalk,
                    &sets,
                    s3,
                    n,
                    t_phase,
                    &start,
                    streams,
                    REJECTION_RESTART_BUDGET,
                )?,
                _ => dephase_fleming_viot(
                    &BiasedWalk,
                    &sets,
                    s3,
                    n,
                    t_phase,
                    &start,
                    streams,
                    ExtinctionPolicy::Restart,
                )?,
            };
            // States of the biased walk are 1..=60, index = state - 1.
            let mut hist = vec![0.0; nu.len()];
            for &x in &out.samples {
                hist[x - 1] += 1.0 / n as f64;
            }
            let tv = nu.total_variation(&parrep::FiniteDistribution::normalized(hist)?);
            println!(
                "{mode:>12} T_phase={t_phase:3}: TV {tv:.4}, work {} steps, restarts {}",
                out.work, out.restarts
            );
        }
    }
    Ok(())
}
