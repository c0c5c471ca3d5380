//! ParRep on a user-defined kernel: a lazy walk on a ring of 40 sites with
//! two sticky arcs, given as a dense matrix and as a hand-written kernel.
//!
//! cargo run --release --example custom_chain

use parrep::engine::{Initial, ParRep, ParRepConfig};
use parrep::models::{equilibrium_averages, exact_equilibrium};
use parrep::rng::RngStream;
use parrep::{ChainKernel, MatrixKernel, MetastableCollection, Observable};

const SITES: usize = 40;

/// Leaves an arc only through its two boundary sites, with small probability.
struct StickyRing;

fn wall(x: usize, y: usize) -> bool {
    (x < 20) != (y < 20)
}

impl ChainKernel for StickyRing {
    type State = usize;

    fn step(&self, x: &usize, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let (left, right) = ((x + SITES - 1) % SITES, (x + 1) % SITES);
        let target = if u < 0.25 {
            left
        } else if u < 0.5 {
            right
        } else {
            return *x;
        };
        if wall(*x, target) && rng.uniform() >= 0.01 {
            *x
        } else {
            target
        }
    }

    fn contains(&self, x: &usize) -> bool {
        *x < SITES
    }
}

fn dense() -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; SITES]; SITES];
    for x in 0..SITES {
        for y in [(x + SITES - 1) % SITES, (x + 1) % SITES] {
            let w = if wall(x, y) { 0.25 * 0.01 } else { 0.25 };
            p[x][y] += w;
            p[x][x] += 0.25 - w;
        }
        p[x][x] += 0.5;
    }
    p
}

fn main() -> parrep::Result<()> {
    let arcs = |n| -> parrep::Result<MetastableCollection<usize>> {
        MetastableCollection::new()
            .with_indices("A", 400, 400, n, &(0..20).collect::<Vec<_>>())?
            .with_indices("B", 400, 400, n, &(20..40).collect::<Vec<_>>())
    };
    let observables = vec![Observable::new("in_B", |x: &usize| f64::from(*x >= 20))];
    let config = ParRepConfig {
        replicas: 16,
        stop_t_sim: 2_000_000,
        ..ParRepConfig::default()
    };

    let matrix = MatrixKernel::from_dense(&dense())?;
    let pi = exact_equilibrium(&matrix)?;
    println!(
        "exact <in_B> = {:.4}",
        equilibrium_averages(&matrix, &pi, &observables)?[0]
    );

    let sets = arcs(SITES)?;
    let a =
        ParRep::new(&matrix, &sets, config.clone(), &observables)?.run(&Initial::State(3), 1)?;
    let b = ParRep::new(&StickyRing, &sets, config, &observables)?.run(&Initial::State(3), 1)?;
    println!(
        "matrix kernel: <in_B> = {:.4}, speedup {:.2}",
        a.estimates[0],
        parrep::speedup(&a.acc)?
    );
    println!(
        "custom kernel: <in_B> = {:.4}, speedup {:.2}",
        b.estimates[0],
        parrep::speedup(&b.acc)?
    );
    Ok(())
}
