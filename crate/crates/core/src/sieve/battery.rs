//! Randomized stress battery for the exact sieve machinery.
//!
//! Families are generated with a deliberate bias toward the degenerate
//! configurations the sieve has to price correctly: duplicate vectors,
//! scalar multiples, zero vectors, and short integer combinations of earlier
//! rows. Every instance is checked for
//!
//! * the two-sided truncation bounds at all odd/even order pairs up to 5/4,
//! * the structural table invariants (probability ordering, monotonicity,
//!   the cross bound, and the collapsed alternating binomial sums),
//! * the blocked-extension inequality d_k <= (k+1) rho_{k+1}^k,
//! * the weighted bounds for a random nonnegative functional,
//! * agreement between exact integer rank and a floating-point rank.
//!
//! Instances derive their generators from (seed, label, index), so reports
//! are identical regardless of how the work is split across threads.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::seeding::stream_rng;
use crate::sieve::functional::{alternate, weighted_level_sums, TestFunctional};
use crate::sieve::mask::{mask_indices, mask_len, Mask};
use crate::sieve::table::sigma_tau;
use crate::sieve::{approx_rank, SieveVariant, VectorFamily};

const CHUNK: u64 = 256;
const MAX_RECORDED_FAILURES: usize = 5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatteryParams {
    pub lemma_trials: u64,
    pub weighted_trials: u64,
    pub dim_max: usize,
    pub set_max: usize,
    /// d_k is checked for k up to this bound (cost control; the check is
    /// combinatorial in k).
    pub dk_k_max: usize,
    pub seed: u64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            lemma_trials: 10_000,
            weighted_trials: 10_000,
            dim_max: 6,
            set_max: 10,
            dk_k_max: 3,
            seed: 2026,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct CheckCounts {
    pub checks: u64,
    pub failures: u64,
}

impl CheckCounts {
    fn absorb(&mut self, other: CheckCounts) {
        self.checks += other.checks;
        self.failures += other.failures;
    }
}

/// Which degenerate branches the generator actually exercised.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct CoverageCounts {
    /// Instances whose ambient subset is linearly dependent.
    pub dependent_ambient: u64,
    /// Instances where some slack (deficiency exactly 1) subset was counted,
    /// i.e. the p and q rows differ somewhere.
    pub slack_exercised: u64,
    pub zero_vector_present: u64,
    pub duplicate_present: u64,
    pub base_equals_ambient: u64,
    pub empty_base: u64,
    /// Weighted instances whose functional has nonempty support.
    pub nonzero_support: u64,
}

impl CoverageCounts {
    fn absorb(&mut self, o: &CoverageCounts) {
        self.dependent_ambient += o.dependent_ambient;
        self.slack_exercised += o.slack_exercised;
        self.zero_vector_present += o.zero_vector_present;
        self.duplicate_present += o.duplicate_present;
        self.base_equals_ambient += o.base_equals_ambient;
        self.empty_base += o.empty_base;
        self.nonzero_support += o.nonzero_support;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureRecord {
    pub check: String,
    pub dim: usize,
    pub rows: Vec<Vec<i64>>,
    pub base_mask: u32,
    pub ambient_mask: u32,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatteryReport {
    pub schema: u32,
    pub params: BatteryParams,
    pub lemma_instances: u64,
    pub weighted_instances: u64,
    pub two_sided: CheckCounts,
    pub table_invariants: CheckCounts,
    pub blocked_extension: CheckCounts,
    pub weighted_bounds: CheckCounts,
    pub rank_crosscheck: CheckCounts,
    pub coverage: CoverageCounts,
    pub failures: Vec<FailureRecord>,
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl BatteryReport {
    pub fn total_failures(&self) -> u64 {
        self.two_sided.failures
            + self.table_invariants.failures
            + self.blocked_extension.failures
            + self.weighted_bounds.failures
            + self.rank_crosscheck.failures
    }
}

#[derive(Default)]
struct Tally {
    two_sided: CheckCounts,
    table_invariants: CheckCounts,
    blocked_extension: CheckCounts,
    weighted_bounds: CheckCounts,
    rank_crosscheck: CheckCounts,
    coverage: CoverageCounts,
    failures: Vec<FailureRecord>,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.two_sided.absorb(other.two_sided);
        self.table_invariants.absorb(other.table_invariants);
        self.blocked_extension.absorb(other.blocked_extension);
        self.weighted_bounds.absorb(other.weighted_bounds);
        self.rank_crosscheck.absorb(other.rank_crosscheck);
        self.coverage.absorb(&other.coverage);
        self.failures.extend(other.failures);
    }

    fn record(&mut self, check: &str, inst: &Instance, detail: String) {
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(FailureRecord {
                check: check.to_string(),
                dim: inst.dim,
                rows: inst.rows.clone(),
                base_mask: inst.base,
                ambient_mask: inst.ambient,
                detail,
            });
        }
    }
}

struct Instance {
    dim: usize,
    rows: Vec<Vec<i64>>,
    family: VectorFamily,
    base: Mask,
    ambient: Mask,
}

/// Run the full battery. Deterministic in `params`.
pub fn run_sieve_battery(params: &BatteryParams) -> BatteryReport {
    let start = Instant::now();
    let lemma = run_chunked(params.lemma_trials, |idx| {
        lemma_instance(params, stream_rng(params.seed, "battery.lemma", idx))
    });
    let weighted = run_chunked(params.weighted_trials, |idx| {
        weighted_instance(params, stream_rng(params.seed, "battery.weighted", idx))
    });
    let mut tally = lemma;
    tally.absorb(weighted);
    tally.failures.truncate(MAX_RECORDED_FAILURES);
    BatteryReport {
        schema: 1,
        params: params.clone(),
        lemma_instances: params.lemma_trials,
        weighted_instances: params.weighted_trials,
        two_sided: tally.two_sided,
        table_invariants: tally.table_invariants,
        blocked_extension: tally.blocked_extension,
        weighted_bounds: tally.weighted_bounds,
        rank_crosscheck: tally.rank_crosscheck,
        coverage: tally.coverage,
        failures: tally.failures,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

fn run_chunked(trials: u64, per_instance: impl Fn(u64) -> Tally + Sync) -> Tally {
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Tally::default();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                acc.absorb(per_instance(idx));
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), |mut acc, t| {
            acc.absorb(t);
            acc
        })
}

/// Dependency-biased family: duplicates, scalar multiples, zero rows and
/// short combinations of earlier rows appear with substantial probability.
fn random_rows(rng: &mut ChaCha8Rng, dim_max: usize, set_max: usize) -> (usize, Vec<Vec<i64>>) {
    let dim = rng.random_range(2..=dim_max);
    let m = rng.random_range(1..=set_max);
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(m);
    for i in 0..m {
        let roll: f64 = rng.random();
        let row = if i > 0 && roll < 0.15 {
            rows[rng.random_range(0..i)].clone()
        } else if i > 0 && roll < 0.30 {
            let scalars = [-3i64, -2, -1, 2, 3];
            let c = scalars[rng.random_range(0..scalars.len())];
            rows[rng.random_range(0..i)].iter().map(|x| c * x).collect()
        } else if roll < 0.40 {
            vec![0i64; dim]
        } else if i >= 2 && roll < 0.55 {
            let u = rng.random_range(0..i);
            let v = rng.random_range(0..i);
            let a = rng.random_range(-2i64..=2);
            let b = rng.random_range(-2i64..=2);
            (0..dim).map(|j| a * rows[u][j] + b * rows[v][j]).collect()
        } else {
            (0..dim).map(|_| rng.random_range(-3i64..=3)).collect()
        };
        rows.push(row);
    }
    (dim, rows)
}

fn random_instance(rng: &mut ChaCha8Rng, dim_max: usize, set_max: usize) -> Instance {
    let (dim, rows) = random_rows(rng, dim_max, set_max);
    let family = VectorFamily::from_rows_i64(dim, &rows).expect("generator respects caps");
    let mut ambient: Mask = 0;
    for i in 0..rows.len() {
        if rng.random_bool(0.85) {
            ambient |= 1 << i;
        }
    }
    // Grow an independent base inside the ambient set, in shuffled order;
    // occasionally greedily maximal so base == ambient gets exercised.
    let mut order: Vec<usize> = mask_indices(ambient).collect();
    order.shuffle(rng);
    let greedy = rng.random_bool(0.15);
    let mut base: Mask = 0;
    for i in order {
        if greedy || rng.random_bool(0.5) {
            let cand = base | (1 << i);
            if family.rank_of(cand).unwrap() == mask_len(cand) {
                base = cand;
            }
        }
    }
    Instance { dim, rows, family, base, ambient }
}

fn coverage_of(inst: &Instance) -> CoverageCounts {
    let rows_in: Vec<&Vec<i64>> = mask_indices(inst.ambient).map(|i| &inst.rows[i]).collect();
    let mut cov = CoverageCounts::default();
    cov.dependent_ambient =
        u64::from(inst.family.rank_deficiency(inst.ambient).unwrap() > 0);
    cov.zero_vector_present = u64::from(rows_in.iter().any(|r| r.iter().all(|&x| x == 0)));
    cov.duplicate_present = u64::from(
        rows_in
            .iter()
            .enumerate()
            .any(|(i, r)| rows_in[..i].contains(r)),
    );
    cov.base_equals_ambient = u64::from(inst.base == inst.ambient);
    cov.empty_base = u64::from(inst.base == 0);
    cov
}

const ODD_ORDERS: [usize; 3] = [1, 3, 5];
const EVEN_ORDERS: [usize; 3] = [0, 2, 4];

fn lemma_instance(params: &BatteryParams, mut rng: ChaCha8Rng) -> Tally {
    let mut tally = Tally::default();
    let inst = random_instance(&mut rng, params.dim_max, params.set_max);
    tally.coverage = coverage_of(&inst);

    let table = match sigma_tau(&inst.family, inst.base, inst.ambient, 5) {
        Ok(t) => t,
        Err(e) => {
            tally.table_invariants.checks += 1;
            tally.table_invariants.failures += 1;
            tally.record("table-construction", &inst, e.to_string());
            return tally;
        }
    };
    tally.coverage.slack_exercised = u64::from(table.p != table.q);

    tally.table_invariants.checks += 1;
    let violations = table.invariant_violations();
    if !violations.is_empty() {
        tally.table_invariants.failures += 1;
        tally.record("table-invariants", &inst, violations.join("; "));
    }

    let indicator = BigInt::from(u8::from(inst.base == inst.ambient));
    for r1 in ODD_ORDERS {
        for r2 in EVEN_ORDERS {
            tally.two_sided.checks += 1;
            let lower = &table.sigma_partial[r1];
            let upper = &table.tau_partial[r2];
            if !(lower <= &indicator && &indicator <= upper) {
                tally.two_sided.failures += 1;
                tally.record(
                    "two-sided-bound",
                    &inst,
                    format!("r1={r1} r2={r2}: {lower} <= {indicator} <= {upper} fails"),
                );
            }
        }
    }

    for k in 0..=params.dk_k_max.min(mask_len(inst.ambient)) {
        tally.blocked_extension.checks += 1;
        let dk = inst.family.count_dk(inst.ambient, k).unwrap();
        let rho = inst.family.rho(inst.ambient, k + 1, k).unwrap();
        if dk > (k as u64 + 1) * rho {
            tally.blocked_extension.failures += 1;
            tally.record(
                "blocked-extension",
                &inst,
                format!("k={k}: d_k={dk} exceeds (k+1) rho={}", (k as u64 + 1) * rho),
            );
        }
    }

    tally.rank_crosscheck.checks += 1;
    let floats: Vec<Vec<f64>> = mask_indices(inst.ambient)
        .map(|i| inst.rows[i].iter().map(|&x| x as f64).collect())
        .collect();
    let exact = inst.family.rank_of(inst.ambient).unwrap();
    let approx = approx_rank(&floats, 1e-9);
    if exact != approx {
        tally.rank_crosscheck.failures += 1;
        tally.record("rank-crosscheck", &inst, format!("exact {exact} vs float {approx}"));
    }

    tally
}

fn weighted_instance(params: &BatteryParams, mut rng: ChaCha8Rng) -> Tally {
    let mut tally = Tally::default();
    let inst = random_instance(&mut rng, params.dim_max, params.set_max);
    tally.coverage = coverage_of(&inst);
    let b = inst.ambient;
    let nb = mask_len(b);
    let k = rng.random_range(0..=nb.min(3));

    // Random nonnegative rationals on up to four independent k-subsets.
    let mut values: BTreeMap<Mask, BigRational> = BTreeMap::new();
    let pool: Vec<usize> = mask_indices(b).collect();
    for _ in 0..12 {
        if values.len() >= 4 || pool.len() < k {
            break;
        }
        let mut order = pool.clone();
        order.shuffle(&mut rng);
        let cand: Mask = order[..k].iter().fold(0, |m, &i| m | 1 << i);
        if inst.family.rank_deficiency(cand).unwrap() == 0 {
            let num = rng.random_range(0i64..=6);
            let den = rng.random_range(1i64..=4);
            values.insert(cand, BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
    }
    let phi = TestFunctional::new(&inst.family, values).expect("support is independent");
    tally.coverage.nonzero_support = u64::from(phi.support_len() > 0);

    let lower_levels = weighted_level_sums(&inst.family, b, k, 5, SieveVariant::Lower, &phi);
    let upper_levels = weighted_level_sums(&inst.family, b, k, 4, SieveVariant::Upper, &phi);
    let mid = if nb == k { phi.value(b) } else { BigRational::from(BigInt::from(0)) };
    for r1 in ODD_ORDERS {
        for r2 in EVEN_ORDERS {
            tally.weighted_bounds.checks += 1;
            let lower = alternate(&lower_levels, r1);
            let upper = alternate(&upper_levels, r2);
            if !(lower <= mid && mid <= upper) {
                tally.weighted_bounds.failures += 1;
                tally.record(
                    "weighted-bound",
                    &inst,
                    format!("k={k} r1={r1} r2={r2}: {lower} <= {mid} <= {upper} fails"),
                );
            }
        }
    }
    tally
}
