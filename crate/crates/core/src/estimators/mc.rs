//! Trial engines: scheduling-independent Monte Carlo over lattices and
//! Poisson configurations.
//!
//! Work is split into fixed chunks of `TRIAL_CHUNK` trials. Each chunk owns
//! an independent generator stream derived from (seed, label, chunk index),
//! so the trial values depend only on the plan, never on how rayon
//! schedules chunks across workers. Lattice chunks amortize one Markov
//! chain per chunk (burn-in once, thinning between trials); Poisson trials
//! are cheap enough to re-seed per trial inside the chunk.
//!
//! Every trial returns a fixed-length statistic vector; aggregation over a
//! column runs in trial order, so sums are bit-reproducible.

use rayon::prelude::*;

use crate::lattice::haar::{ChainParams, LatticeChain};
use crate::lattice::UnimodularLattice;
use crate::points::PointConfig;
use crate::poisson::sample_poisson;
use crate::region::Region;
use crate::seeding::{mix_seed, stream_rng};
use crate::stats::mean_and_stderr;
use crate::Result;

/// Trials per generator stream. Large enough to amortize chain burn-in,
/// small enough to parallelize short runs.
pub const TRIAL_CHUNK: usize = 512;

fn chunk_sizes(trials: usize) -> Vec<usize> {
    let full = trials / TRIAL_CHUNK;
    let rest = trials % TRIAL_CHUNK;
    let mut sizes = vec![TRIAL_CHUNK; full];
    if rest > 0 {
        sizes.push(rest);
    }
    sizes
}

/// Run `trials` Haar-sampled lattices through `stat`, one statistic vector
/// per trial, in deterministic trial order.
pub fn run_lattice_trials<F>(
    n: usize,
    seed: u64,
    label: &str,
    trials: usize,
    params: ChainParams,
    stat: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&UnimodularLattice) -> Result<Vec<f64>> + Sync,
{
    let chunks: Vec<Vec<Vec<f64>>> = chunk_sizes(trials)
        .par_iter()
        .enumerate()
        .map(|(ci, &len)| {
            let mut chain = LatticeChain::new(n, mix_seed(seed, label, ci as u64), params)?;
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let lat = chain.next_lattice()?;
                out.push(stat(&lat)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Run `trials` Poisson configurations through `stat`. Each trial has its
/// own stream keyed by global trial index.
pub fn run_poisson_trials<F>(
    region: &Region,
    seed: u64,
    label: &str,
    trials: usize,
    stat: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&PointConfig) -> Result<Vec<f64>> + Sync,
{
    let chunks: Vec<Vec<Vec<f64>>> = chunk_sizes(trials)
        .par_iter()
        .enumerate()
        .map(|(ci, &len)| {
            let base = ci * TRIAL_CHUNK;
            let mut out = Vec::with_capacity(len);
            for t in 0..len {
                let mut rng = stream_rng(seed, label, (base + t) as u64);
                let cfg = sample_poisson(region, &mut rng)?;
                out.push(stat(&cfg)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Mean and standard error of one statistic column, in trial order.
pub fn column_stats(rows: &[Vec<f64>], col: usize) -> (f64, f64) {
    let xs: Vec<f64> = rows.iter().map(|r| r[col]).collect();
    mean_and_stderr(&xs)
}
