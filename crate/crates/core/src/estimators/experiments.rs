//! The experiments: moment identities, the rank-drop tail bound, the
//! two-process subset-sum identity, the small-span event, and Poisson
//! references.
//!
//! Every experiment follows the same shape: a guarded plan, one chunked
//! Monte Carlo run per process, and one `McReport` per estimated quantity.
//! Lattice-side subset statistics are exact (integer coefficient vectors,
//! fraction-free rank); the Monte Carlo layer only supplies the lattices.
//!
//! Trial statistic vectors reserve column 0 for an abort flag: subset
//! enumeration aborts on configurations above `MAX_SUBSET_POINTS` points
//! (mask width), and aborted trials are excluded from means but counted in
//! the report. Count-only statistics (the mean of |L ∩ S|, the moment at
//! k = 1) never abort, so the heavy tail of the count distribution is never
//! truncated where it matters.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::comb::{binomial, factorial_f64};
use crate::error::Error;
use crate::estimators::mc::{run_lattice_trials, run_poisson_trials};
use crate::estimators::report::{McReport, Verdict};
use crate::lattice::haar::ChainParams;
use crate::points::{lattice_restriction, PointConfig};
use crate::poisson::poisson_pmf;
use crate::region::Region;
use crate::sieve::{approx_rank, exact_rank, k_subsets, mask_indices};
use crate::stats::{chi2_sf, mean_and_stderr};
use crate::Result;

/// The small-volume regime coefficient: plans demand lambda <= n * C0
/// unless explicitly overridden. Most validation suites run far above this
/// regime on purpose; the guard exists so that production sweeps do not
/// leave it by accident.
pub const GUARD_C0: f64 = 1.0 / 200.0;

/// Configurations above this size abort subset-sum trials (bitmask width).
pub const MAX_SUBSET_POINTS: usize = 24;

/// Cap on points enumerated per lattice trial. Expected occupancy of the
/// enumeration ball is 2 * lambda, so this is pure blowup protection.
pub const ENUM_CAP: usize = 100_000;

/// Common parameters of one experiment run.
#[derive(Clone, Debug)]
pub struct ExperimentParams {
    pub label: String,
    pub n: usize,
    pub region: Region,
    pub trials: usize,
    pub seed: u64,
    pub chain: ChainParams,
    pub gate: f64,
    pub allow_large_lambda: bool,
}

impl ExperimentParams {
    pub fn lambda(&self) -> f64 {
        self.region.volume()
    }

    pub fn validate(&self) -> Result<()> {
        if self.region.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: self.region.dim() });
        }
        if self.trials < 100 {
            return Err(Error::InvalidParameter("an experiment needs at least 100 trials".into()));
        }
        let limit = GUARD_C0 * self.n as f64;
        if !self.allow_large_lambda && self.lambda() > limit {
            return Err(Error::GuardViolation { lambda: self.lambda(), limit });
        }
        Ok(())
    }
}

/// Right-hand side of the rank-drop moment bound:
/// (lambda^(k-1) / (k-1)!) * (3^k (3/4)^(n/2) + 5^k 2^(-n)).
pub fn rank_drop_bound(n: usize, lambda: f64, k: usize) -> f64 {
    assert!(k >= 1, "the bound is stated for k >= 1");
    let prefactor = lambda.powi(k as i32 - 1) / factorial_f64(k - 1);
    let body = 3.0f64.powi(k as i32) * 0.75f64.powf(n as f64 / 2.0)
        + 5.0f64.powi(k as i32) * 2.0f64.powi(-(n as i32));
    prefactor * body
}

/// True when the two integer vectors are parallel (all 2x2 minors vanish).
fn parallel(u: &[BigInt], v: &[BigInt]) -> bool {
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            if &u[i] * &v[j] != &u[j] * &v[i] {
                return false;
            }
        }
    }
    true
}

/// Number of unordered parallel pairs among the coefficient vectors.
fn parallel_pairs(coeffs: &[Vec<BigInt>]) -> u64 {
    let mut count = 0;
    for i in 0..coeffs.len() {
        for j in (i + 1)..coeffs.len() {
            if parallel(&coeffs[i], &coeffs[j]) {
                count += 1;
            }
        }
    }
    count
}

fn coeffs_of(cfg: &PointConfig) -> Result<&[Vec<BigInt>]> {
    cfg.coeffs().ok_or_else(|| {
        Error::InvalidParameter("lattice statistics need coefficient vectors".into())
    })
}

/// Exact count of k-subsets of rank j. Sizes k <= 2 have closed forms with
/// no cap; larger k goes through the bitmask walker and returns None above
/// the mask width (the caller records an aborted trial).
fn rho_count(cfg: &PointConfig, k: usize, j: usize) -> Result<Option<u64>> {
    let npts = cfg.len();
    let value = match (k, j) {
        (0, 0) => Some(1),
        (0, _) => Some(0),
        // No zero vector ever lies in S (0 is in -S too), so every
        // singleton has rank 1 and every pair has rank >= 1.
        (1, 1) => Some(npts as u64),
        (1, _) => Some(0),
        (2, 2) if npts < 2 => Some(0),
        (2, 1) if npts < 2 => Some(0),
        (2, 2) => {
            let c = coeffs_of(cfg)?;
            Some(binomial_u64(npts, 2) - parallel_pairs(c))
        }
        (2, 1) => Some(parallel_pairs(coeffs_of(cfg)?)),
        (2, _) => Some(0),
        _ => {
            if npts > MAX_SUBSET_POINTS {
                None
            } else {
                let family = cfg.coeff_family()?;
                Some(family.rho(family.full_mask(), k, j)?)
            }
        }
    };
    Ok(value)
}

fn binomial_u64(n: usize, k: usize) -> u64 {
    use num_traits::ToPrimitive;
    binomial(n, k).to_u64().expect("small binomial")
}

/// Mean, stderr, kept-trial count, and abort count of one column, skipping
/// trials whose abort flag (column 0) is set.
fn filtered_column(rows: &[Vec<f64>], col: usize) -> (f64, f64, u64, u64) {
    let kept: Vec<f64> = rows.iter().filter(|r| r[0] == 0.0).map(|r| r[col]).collect();
    let aborted = (rows.len() - kept.len()) as u64;
    let (mean, se) = mean_and_stderr(&kept);
    (mean, se, kept.len() as u64, aborted)
}

/// Monte Carlo means of the independent-k-subset counts against the Poisson
/// factorial-moment targets lambda^k / k!.
pub fn estimate_rho_kk(params: &ExperimentParams, ks: &[usize]) -> Result<Vec<McReport>> {
    params.validate()?;
    for &k in ks {
        if k + 1 > params.n {
            return Err(Error::InvalidParameter(format!(
                "moment order k={k} needs k <= n-1 (n={})",
                params.n
            )));
        }
    }
    let region = params.region.clone();
    let rows = run_lattice_trials(
        params.n,
        params.seed,
        &params.label,
        params.trials,
        params.chain,
        |lat| {
            let cfg = lattice_restriction(lat, &region, ENUM_CAP)?;
            let mut row = vec![0.0; ks.len() + 1];
            for (i, &k) in ks.iter().enumerate() {
                match rho_count(&cfg, k, k)? {
                    Some(v) => row[i + 1] = v as f64,
                    None => {
                        row[0] = 1.0;
                        break;
                    }
                }
            }
            Ok(row)
        },
    )?;
    let lambda = params.lambda();
    let mut reports = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let (mean, se, kept, aborted) = filtered_column(&rows, i + 1);
        let target = lambda.powi(k as i32) / factorial_f64(k);
        reports.push(
            McReport::gated(
                format!("{}.k{}", params.label, k),
                params.n,
                lambda,
                Some(k),
                kept,
                mean,
                se,
                target,
                params.gate,
                false,
            )
            .with_extra("aborted_trials", aborted as f64),
        );
    }
    Ok(reports)
}

/// One-sided check of the rank-drop moment against `rank_drop_bound`. The
/// bound is an upper bound, so the verdict only gates the upper excess; the
/// mean-to-bound ratio is reported for the record (the bound is loose at
/// small n).
pub fn estimate_rho_k_km1(params: &ExperimentParams, ks: &[usize]) -> Result<Vec<McReport>> {
    params.validate()?;
    for &k in ks {
        if k < 1 || k + 1 > params.n {
            return Err(Error::InvalidParameter(format!(
                "rank-drop order k={k} needs 1 <= k <= n-1 (n={})",
                params.n
            )));
        }
    }
    let region = params.region.clone();
    let rows = run_lattice_trials(
        params.n,
        params.seed,
        &params.label,
        params.trials,
        params.chain,
        |lat| {
            let cfg = lattice_restriction(lat, &region, ENUM_CAP)?;
            let mut row = vec![0.0; ks.len() + 1];
            for (i, &k) in ks.iter().enumerate() {
                match rho_count(&cfg, k, k - 1)? {
                    Some(v) => row[i + 1] = v as f64,
                    None => {
                        row[0] = 1.0;
                        break;
                    }
                }
            }
            Ok(row)
        },
    )?;
    let lambda = params.lambda();
    let mut reports = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let (mean, se, kept, aborted) = filtered_column(&rows, i + 1);
        let bound = rank_drop_bound(params.n, lambda, k);
        reports.push(
            McReport::gated(
                format!("{}.k{}", params.label, k),
                params.n,
                lambda,
                Some(k),
                kept,
                mean,
                se,
                bound,
                params.gate,
                true,
            )
            .with_extra("aborted_trials", aborted as f64)
            .with_extra("mean_over_bound", mean / bound),
        );
    }
    Ok(reports)
}

/// The built-in test functionals on k-point subsets. All are supported on
/// subsets of exact size k, so they vanish at cardinality >= n whenever
/// k <= n-1, as the subset-sum identity requires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinFunctional {
    /// 1 on every k-subset: the count functional.
    Count,
    /// Product of |x| / r over the subset, r the region circumradius.
    Radial,
    /// 1 when all pairwise angles are at least theta.
    MinAngle,
}

pub const BUILTIN_FUNCTIONALS: [BuiltinFunctional; 3] =
    [BuiltinFunctional::Count, BuiltinFunctional::Radial, BuiltinFunctional::MinAngle];

impl BuiltinFunctional {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinFunctional::Count => "count",
            BuiltinFunctional::Radial => "radial",
            BuiltinFunctional::MinAngle => "min_angle",
        }
    }

    fn eval(self, subset: &[&[f64]], radius: f64, cos_theta: f64) -> f64 {
        match self {
            BuiltinFunctional::Count => 1.0,
            BuiltinFunctional::Radial => subset
                .iter()
                .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() / radius)
                .product(),
            BuiltinFunctional::MinAngle => {
                for i in 0..subset.len() {
                    for j in (i + 1)..subset.len() {
                        let (u, v) = (subset[i], subset[j]);
                        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                        let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
                        let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                        // angle >= theta means cos(angle) <= cos(theta)
                        if dot / (nu * nv) > cos_theta {
                            return 0.0;
                        }
                    }
                }
                1.0
            }
        }
    }
}

/// Sum of f over all k-subsets of the configuration, one value per
/// functional, times the exact independence indicator when `with_iota` is
/// set. Returns None when the configuration exceeds the mask width (only
/// possible for k >= 2, where subsets must actually be enumerated).
fn subset_sums(
    cfg: &PointConfig,
    k: usize,
    fs: &[BuiltinFunctional],
    radius: f64,
    cos_theta: f64,
    with_iota: bool,
) -> Result<Option<Vec<f64>>> {
    let npts = cfg.len();
    let mut sums = vec![0.0; fs.len()];
    if k == 0 {
        // The empty subset: iota is 1 by convention, every functional is 1
        // (empty product, vacuous angle condition).
        for s in sums.iter_mut() {
            *s = 1.0;
        }
        return Ok(Some(sums));
    }
    if npts < k {
        return Ok(Some(sums));
    }
    if k == 1 {
        // Singletons in S are never the origin, so iota is always 1.
        for p in cfg.points() {
            let subset = [p.as_slice()];
            for (s, f) in sums.iter_mut().zip(fs) {
                *s += f.eval(&subset, radius, cos_theta);
            }
        }
        return Ok(Some(sums));
    }
    if npts > MAX_SUBSET_POINTS {
        return Ok(None);
    }
    let coeffs = if with_iota { Some(coeffs_of(cfg)?) } else { None };
    let full = if npts == 0 { 0 } else { (1u32 << npts) - 1 };
    for mask in k_subsets(full, k) {
        let idx: Vec<usize> = mask_indices(mask).collect();
        if let Some(cs) = coeffs {
            let independent = if k == 2 {
                !parallel(&cs[idx[0]], &cs[idx[1]])
            } else {
                let rows: Vec<Vec<BigInt>> = idx.iter().map(|&i| cs[i].clone()).collect();
                exact_rank(&rows) == k
            };
            if !independent {
                continue;
            }
        }
        let subset: Vec<&[f64]> = idx.iter().map(|&i| cfg.points()[i].as_slice()).collect();
        for (s, f) in sums.iter_mut().zip(fs) {
            *s += f.eval(&subset, radius, cos_theta);
        }
    }
    Ok(Some(sums))
}

/// Exact per-configuration truncation identity for the indicator
/// functional: the alternating subset sum truncated at even order R, minus
/// the classic-bound correction term (the unsigned r = R summand), never
/// exceeds the indicator that the whole configuration has exactly k points.
/// Pure combinatorics in exact integers.
fn truncation_respects_classic_bound(npts: usize, k: usize, big_r: usize) -> bool {
    debug_assert!(big_r % 2 == 0);
    if npts < k {
        return true;
    }
    let u = binomial(npts, k);
    let rest = npts - k;
    let mut alternating = BigInt::zero();
    for r in 0..=big_r {
        let term = &u * binomial(rest, r);
        if r % 2 == 0 {
            alternating += term;
        } else {
            alternating -= term;
        }
    }
    let indicator = BigInt::from(u64::from(npts == k));
    let correction = &u * binomial(rest, big_r);
    alternating <= indicator + correction
}

/// Two-process check of the subset-sum identity: for each built-in
/// functional, the lattice-side mean of the independent-subset sum is
/// compared with the Poisson-side mean of the plain subset sum via a
/// two-sample z statistic. The Poisson side also verifies the exact
/// truncation inequality on every sampled configuration; violations are
/// counted in `extra` (the contract is zero).
pub fn verify_subset_sums(params: &ExperimentParams, k: usize, theta: f64) -> Result<Vec<McReport>> {
    params.validate()?;
    if k + 1 > params.n {
        return Err(Error::InvalidParameter(format!(
            "functional support k={k} needs k <= n-1 (n={})",
            params.n
        )));
    }
    let region = params.region.clone();
    let radius = region.circumradius();
    let cos_theta = theta.cos();
    let fs = BUILTIN_FUNCTIONALS;

    let lattice_label = format!("{}.lattice", params.label);
    let lat_rows = run_lattice_trials(
        params.n,
        params.seed,
        &lattice_label,
        params.trials,
        params.chain,
        |lat| {
            let cfg = lattice_restriction(lat, &region, ENUM_CAP)?;
            match subset_sums(&cfg, k, &fs, radius, cos_theta, true)? {
                Some(sums) => {
                    let mut row = vec![0.0];
                    row.extend(sums);
                    Ok(row)
                }
                None => Ok(vec![1.0, 0.0, 0.0, 0.0]),
            }
        },
    )?;

    let poisson_label = format!("{}.poisson", params.label);
    let poi_rows = run_poisson_trials(&region, params.seed, &poisson_label, params.trials, |cfg| {
        let trunc_ok = truncation_respects_classic_bound(cfg.len(), k, 2);
        match subset_sums(cfg, k, &fs, radius, cos_theta, false)? {
            Some(sums) => {
                let mut row = vec![0.0];
                row.extend(sums);
                row.push(if trunc_ok { 0.0 } else { 1.0 });
                Ok(row)
            }
            None => Ok(vec![1.0, 0.0, 0.0, 0.0, if trunc_ok { 0.0 } else { 1.0 }]),
        }
    })?;
    let trunc_violations: f64 = poi_rows.iter().map(|r| r[4]).sum();

    let lambda = params.lambda();
    let mut reports = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let (ml, sl, kept_l, ab_l) = filtered_column(&lat_rows, i + 1);
        let (mp, sp, kept_p, ab_p) = filtered_column(&poi_rows, i + 1);
        let combined = (sl * sl + sp * sp).sqrt();
        reports.push(
            McReport::gated(
                format!("{}.{}", params.label, f.name()),
                params.n,
                lambda,
                Some(k),
                kept_l.min(kept_p),
                ml - mp,
                combined,
                0.0,
                params.gate,
                false,
            )
            .with_extra("lattice_mean", ml)
            .with_extra("lattice_stderr", sl)
            .with_extra("poisson_mean", mp)
            .with_extra("poisson_stderr", sp)
            .with_extra("aborted_lattice", ab_l as f64)
            .with_extra("aborted_poisson", ab_p as f64)
            .with_extra("truncation_violations", trunc_violations),
        );
    }
    Ok(reports)
}

/// Frequency of the event that L cap S has at most floor(n/10) points and
/// they are linearly independent. No closed-form small-n target exists, so
/// the report is informational; the exact integer rank is cross-checked
/// against the floating-point rank on every trial.
pub fn estimate_rank_event(params: &ExperimentParams) -> Result<Vec<McReport>> {
    params.validate()?;
    let region = params.region.clone();
    let threshold = params.n / 10;
    let rows = run_lattice_trials(
        params.n,
        params.seed,
        &params.label,
        params.trials,
        params.chain,
        |lat| {
            let cfg = lattice_restriction(lat, &region, ENUM_CAP)?;
            let coeffs = coeffs_of(&cfg)?;
            let rank = exact_rank(coeffs);
            let independent = rank == cfg.len();
            let event = cfg.len() <= threshold && independent;
            let float_rank = approx_rank(cfg.points(), 1e-9);
            let mismatch = if float_rank == rank { 0.0 } else { 1.0 };
            Ok(vec![0.0, if event { 1.0 } else { 0.0 }, mismatch])
        },
    )?;
    let (freq, se, kept, _) = filtered_column(&rows, 1);
    let mismatches: f64 = rows.iter().map(|r| r[2]).sum();
    let lambda = params.lambda();
    let report = McReport::informational(params.label.clone(), params.n, lambda, None, kept, freq, se)
        .with_extra("complement_freq", 1.0 - freq)
        .with_extra("cardinality_threshold", threshold as f64)
        .with_extra("rank_mismatches", mismatches)
        .with_extra("in_small_volume_regime", f64::from(lambda <= params.n as f64 / 30.0));
    Ok(vec![report])
}

/// Poisson-side references: the empty-configuration probability against
/// exp(-lambda), and a chi-squared goodness-of-fit of the count histogram
/// (counts above `kmax` lumped into one tail bin). The fit verdict passes
/// when the p-value exceeds 0.001.
pub fn poisson_reference(params: &ExperimentParams, kmax: usize) -> Result<Vec<McReport>> {
    params.validate()?;
    let region = params.region.clone();
    let rows = run_poisson_trials(&region, params.seed, &params.label, params.trials, |cfg| {
        let n = cfg.len();
        let mut row = vec![0.0; kmax + 3];
        row[1 + n.min(kmax + 1)] = 1.0;
        Ok(row)
    })?;
    let lambda = params.lambda();
    let trials = rows.len() as f64;

    let (empty_freq, empty_se, kept, _) = filtered_column(&rows, 1);
    let mut reports = vec![McReport::gated(
        format!("{}.empty", params.label),
        params.n,
        lambda,
        Some(0),
        kept,
        empty_freq,
        empty_se,
        (-lambda).exp(),
        params.gate,
        false,
    )];

    // Chi-squared statistic over bins 0..=kmax plus the lumped tail.
    let mut chi2 = 0.0;
    let mut tail_expected = trials;
    for k in 0..=kmax {
        let observed: f64 = rows.iter().map(|r| r[1 + k]).sum();
        let expected = trials * poisson_pmf(lambda, k as u64);
        tail_expected -= expected;
        chi2 += (observed - expected).powi(2) / expected;
    }
    let tail_observed: f64 = rows.iter().map(|r| r[2 + kmax]).sum();
    if tail_expected > 0.0 {
        chi2 += (tail_observed - tail_expected).powi(2) / tail_expected;
    }
    let dof = kmax + 1; // bins - 1, all parameters fixed a priori
    let p_value = chi2_sf(chi2, dof);
    let fit_ok = p_value > 1e-3;
    reports.push(McReport {
        label: format!("{}.chi2", params.label),
        n: params.n,
        lambda,
        k: None,
        trials: kept,
        mean: p_value,
        stderr: 0.0,
        ci95: (p_value, p_value),
        target: Some(1e-3),
        zscore: None,
        gate: params.gate,
        one_sided: false,
        verdict: if fit_ok { Verdict::Pass } else { Verdict::Fail },
        extra: [
            ("chi2_statistic".to_string(), chi2),
            ("degrees_of_freedom".to_string(), dof as f64),
            ("tail_expected".to_string(), tail_expected),
        ]
        .into_iter()
        .collect(),
    });
    Ok(reports)
}
