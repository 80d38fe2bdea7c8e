//! Plug-in lower bound on the total variation distance between the two
//! point processes, computed on a finite discretization: the vector of
//! point counts across equal-volume radial cells of the region.
//!
//! Any function of the configuration can only lower the TV distance, so
//! the empirical distance between the two count-vector distributions is a
//! (noisy, slightly upward-biased) lower bound estimate. Rare count
//! vectors are lumped into a remainder bucket before comparing, which
//! keeps the small-sample bias from scaling with the number of observed
//! patterns. Uncertainty comes from a seeded nonparametric bootstrap that
//! recomputes the whole statistic, truncation rule included.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::Error;
use crate::estimators::experiments::{ExperimentParams, ENUM_CAP};
use crate::estimators::mc::{run_lattice_trials, run_poisson_trials};
use crate::estimators::report::McReport;
use crate::points::lattice_restriction;
use crate::seeding::stream_rng;
use crate::Result;

/// A count vector is kept as its own bucket only when one of the samples
/// saw it at least this often; everything rarer is lumped.
pub const MIN_KEY_OCCURRENCES: u64 = 5;

/// Bootstrap resamples behind the reported confidence interval.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

const MAX_CELLS: usize = 4;

/// Pack per-cell counts into one key, 16 bits per cell.
fn pack_key(counts: &[u64]) -> u64 {
    let mut key = 0u64;
    for (c, &v) in counts.iter().enumerate() {
        key |= v.min(0xffff) << (16 * c);
    }
    key
}

/// Truncated total variation between the empirical distributions of two
/// key samples: kept keys contribute their mass difference, everything
/// else is compared as one lumped remainder.
///
/// BTreeMaps, not HashMaps: the float sum must run in key order or its
/// rounding would vary with the per-map hash seed and break byte-stable
/// reruns.
fn truncated_tv(a: &[u64], b: &[u64], min_occ: u64) -> f64 {
    let mut count_a: BTreeMap<u64, u64> = BTreeMap::new();
    let mut count_b: BTreeMap<u64, u64> = BTreeMap::new();
    for &k in a {
        *count_a.entry(k).or_insert(0) += 1;
    }
    for &k in b {
        *count_b.entry(k).or_insert(0) += 1;
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let mut sum = 0.0;
    let mut rem_a = 1.0;
    let mut rem_b = 1.0;
    for (&key, &ca) in &count_a {
        let cb = count_b.get(&key).copied().unwrap_or(0);
        if ca >= min_occ || cb >= min_occ {
            let (pa, pb) = (ca as f64 / na, cb as f64 / nb);
            sum += (pa - pb).abs();
            rem_a -= pa;
            rem_b -= pb;
        }
    }
    for (&key, &cb) in &count_b {
        if cb >= min_occ && !count_a.contains_key(&key) {
            let pb = cb as f64 / nb;
            sum += pb;
            rem_b -= pb;
        }
    }
    0.5 * (sum + (rem_a - rem_b).abs())
}

fn kept_key_count(a: &[u64], b: &[u64], min_occ: u64) -> (u64, u64) {
    let mut count_a: BTreeMap<u64, u64> = BTreeMap::new();
    let mut count_b: BTreeMap<u64, u64> = BTreeMap::new();
    for &k in a {
        *count_a.entry(k).or_insert(0) += 1;
    }
    for &k in b {
        *count_b.entry(k).or_insert(0) += 1;
    }
    let mut keys: Vec<u64> = count_a.keys().copied().collect();
    for k in count_b.keys() {
        if !count_a.contains_key(k) {
            keys.push(*k);
        }
    }
    let kept = keys
        .iter()
        .filter(|k| {
            count_a.get(k).copied().unwrap_or(0) >= min_occ
                || count_b.get(k).copied().unwrap_or(0) >= min_occ
        })
        .count() as u64;
    (keys.len() as u64, kept)
}

/// Percentile bootstrap of `truncated_tv`: resample both key vectors with
/// replacement, recompute the full statistic. Returns (stderr, lo, hi) at
/// the 95% level.
fn bootstrap_tv(
    a: &[u64],
    b: &[u64],
    min_occ: u64,
    resamples: usize,
    seed: u64,
    label: &str,
) -> (f64, f64, f64) {
    let mut rng = stream_rng(seed, label, 0);
    let mut boots = Vec::with_capacity(resamples);
    let mut ra = vec![0u64; a.len()];
    let mut rb = vec![0u64; b.len()];
    for _ in 0..resamples {
        for slot in ra.iter_mut() {
            *slot = a[rng.random_range(0..a.len())];
        }
        for slot in rb.iter_mut() {
            *slot = b[rng.random_range(0..b.len())];
        }
        boots.push(truncated_tv(&ra, &rb, min_occ));
    }
    boots.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let m = boots.len();
    let mean = boots.iter().sum::<f64>() / m as f64;
    let var = boots.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    let lo = boots[(0.025 * m as f64).floor() as usize];
    let hi = boots[((0.975 * m as f64).ceil() as usize).saturating_sub(1).min(m - 1)];
    (var.sqrt(), lo, hi)
}

/// Lower-bound TV estimate between the lattice restriction and the Poisson
/// configuration on the same region, through count vectors over `cells`
/// equal-volume cells. Informational: the interesting output is the value
/// and its bootstrap interval, not a pass gate.
pub fn estimate_tv_lower_bound(params: &ExperimentParams, cells: usize) -> Result<Vec<McReport>> {
    params.validate()?;
    if cells == 0 || cells > MAX_CELLS {
        return Err(Error::InvalidParameter(format!(
            "cell partition size {cells} outside 1..={MAX_CELLS}"
        )));
    }
    let region = params.region.clone();
    let cell_stat = move |points: &[Vec<f64>]| -> Result<Vec<f64>> {
        let mut counts = vec![0u64; cells];
        for p in points {
            counts[region.equal_volume_cell(p, cells)?] += 1;
        }
        let mut row = vec![0.0];
        row.extend(counts.iter().map(|&c| c as f64));
        Ok(row)
    };

    let region_l = params.region.clone();
    let stat_l = cell_stat.clone();
    let lat_rows = run_lattice_trials(
        params.n,
        params.seed,
        &format!("{}.lattice", params.label),
        params.trials,
        params.chain,
        move |lat| {
            let cfg = lattice_restriction(lat, &region_l, ENUM_CAP)?;
            stat_l(cfg.points())
        },
    )?;
    let stat_p = cell_stat.clone();
    let poi_rows = run_poisson_trials(
        &params.region,
        params.seed,
        &format!("{}.poisson", params.label),
        params.trials,
        move |cfg| stat_p(cfg.points()),
    )?;

    let to_keys = |rows: &[Vec<f64>]| -> Vec<u64> {
        rows.iter()
            .map(|r| {
                let counts: Vec<u64> = r[1..].iter().map(|&v| v as u64).collect();
                pack_key(&counts)
            })
            .collect()
    };
    let keys_l = to_keys(&lat_rows);
    let keys_p = to_keys(&poi_rows);

    let tv = truncated_tv(&keys_l, &keys_p, MIN_KEY_OCCURRENCES);
    let (distinct, kept) = kept_key_count(&keys_l, &keys_p, MIN_KEY_OCCURRENCES);
    let (se, lo, hi) = bootstrap_tv(
        &keys_l,
        &keys_p,
        MIN_KEY_OCCURRENCES,
        BOOTSTRAP_RESAMPLES,
        params.seed,
        &format!("{}.bootstrap", params.label),
    );

    let mut report = McReport::informational(
        params.label.clone(),
        params.n,
        params.lambda(),
        None,
        params.trials as u64,
        tv,
        se,
    );
    report.ci95 = (lo, hi);
    Ok(vec![report
        .with_extra("cells", cells as f64)
        .with_extra("distinct_count_vectors", distinct as f64)
        .with_extra("kept_count_vectors", kept as f64)
        .with_extra("bootstrap_resamples", BOOTSTRAP_RESAMPLES as f64)
        .with_extra("min_occurrences", MIN_KEY_OCCURRENCES as f64)])
}
