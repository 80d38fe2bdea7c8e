//! Weighted two-sided sieve bounds.
//!
//! A test functional phi assigns a nonnegative rational to each subset of
//! the family and must vanish on every dependent subset. For a truncation
//! pair (R1 odd, R2 even) and a size k, the weighted alternating sums
//!
//!   L = sum over r <= R1 of (-1)^r sum over X in the lower truncation set
//!       at co-size r of sum over k-subsets Y of X of phi(Y)
//!   U = the same with the upper truncation sets, r <= R2
//!
//! bracket phi(B) when |B| = k and bracket zero otherwise. The coefficient
//! of phi(Y) in L collapses to an alternating sigma sum for the base Y,
//! which `lower_sum_coefficients` exposes for direct verification.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::sieve::mask::{is_subset, k_subsets, mask_len, Mask};
use crate::sieve::{SieveVariant, VectorFamily, MAX_FAMILY_WITH_FUNCTIONAL};
use crate::Result;

/// Nonnegative rational weights on subsets, zero on dependent subsets.
/// Only finitely many subsets carry weight; absent masks weigh zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctional {
    values: BTreeMap<Mask, BigRational>,
}

impl TestFunctional {
    pub fn new(family: &VectorFamily, values: BTreeMap<Mask, BigRational>) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (m, v) in values {
            if v < BigRational::zero() {
                return Err(Error::InvalidFunctional);
            }
            // rank_deficiency also rejects masks outside the family.
            let deficiency = family.rank_deficiency(m)?;
            if v.is_zero() {
                continue;
            }
            if deficiency > 0 {
                return Err(Error::InvalidFunctional);
            }
            kept.insert(m, v);
        }
        Ok(TestFunctional { values: kept })
    }

    /// The indicator of independence restricted to masks of `b`, the
    /// unweighted special case.
    pub fn independence_indicator(family: &VectorFamily, b: Mask) -> Result<Self> {
        let mut values = BTreeMap::new();
        for sub in all_submasks(b) {
            if family.rank_deficiency(sub)? == 0 {
                values.insert(sub, BigRational::one());
            }
        }
        TestFunctional::new(family, values)
    }

    pub fn value(&self, m: Mask) -> BigRational {
        self.values.get(&m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (Mask, &BigRational)> {
        self.values.iter().map(|(m, v)| (*m, v))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }
}

fn all_submasks(b: Mask) -> Vec<Mask> {
    // Standard submask walk, descending; order does not matter here.
    let mut out = Vec::new();
    let mut s = b;
    loop {
        out.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & b;
    }
    out
}

/// Outcome of one weighted bound evaluation: lower and upper alternating
/// sums and the bracketed middle value phi(B) (zero unless |B| = k).
#[derive(Clone, Debug)]
pub struct PropCheck {
    pub lower: BigRational,
    pub mid: BigRational,
    pub upper: BigRational,
    pub ok: bool,
}

/// Evaluate the weighted two-sided bound for (B, k, phi) at truncation
/// orders r1 (odd) and r2 (even).
pub fn check_prop_sieve(
    family: &VectorFamily,
    b: Mask,
    k: usize,
    r1: usize,
    r2: usize,
    phi: &TestFunctional,
) -> Result<PropCheck> {
    if r1 % 2 != 1 || r2 % 2 != 0 {
        return Err(Error::InvalidParameter(
            "weighted bounds need odd lower and even upper truncation orders".into(),
        ));
    }
    if !is_subset(b, family.full_mask()) {
        return Err(Error::InvalidParameter("B must be a subset of the family".into()));
    }
    if mask_len(b) > MAX_FAMILY_WITH_FUNCTIONAL {
        return Err(Error::FamilyTooLarge {
            size: mask_len(b),
            cap: MAX_FAMILY_WITH_FUNCTIONAL,
        });
    }
    let lower = alternating_weighted_sum(family, b, k, r1, SieveVariant::Lower, phi);
    let upper = alternating_weighted_sum(family, b, k, r2, SieveVariant::Upper, phi);
    let mid = if mask_len(b) == k { phi.value(b) } else { BigRational::zero() };
    let ok = lower <= mid && mid <= upper;
    Ok(PropCheck { lower, mid, upper, ok })
}

fn alternating_weighted_sum(
    family: &VectorFamily,
    b: Mask,
    k: usize,
    r_cap: usize,
    variant: SieveVariant,
    phi: &TestFunctional,
) -> BigRational {
    let levels = weighted_level_sums(family, b, k, r_cap, variant, phi);
    alternate(&levels, r_cap)
}

/// Per-co-size inner sums: entry r is the sum over X in the truncation set
/// at co-size r of the phi-mass of X's k-subsets. One pass serves every
/// truncation order up to r_cap.
pub(crate) fn weighted_level_sums(
    family: &VectorFamily,
    b: Mask,
    k: usize,
    r_cap: usize,
    variant: SieveVariant,
    phi: &TestFunctional,
) -> Vec<BigRational> {
    // Restrict the support to size-k masks once; only those enter the sums.
    let support: Vec<(Mask, BigRational)> = phi
        .support()
        .filter(|(m, _)| mask_len(*m) == k)
        .map(|(m, v)| (m, v.clone()))
        .collect();
    (0..=r_cap)
        .map(|r| {
            let mut level = BigRational::zero();
            family.walk_k_subsets(b, k + r, variant.max_deficiency(r), &mut |x, _| {
                for (m, v) in &support {
                    if is_subset(*m, x) {
                        level += v;
                    }
                }
            });
            level
        })
        .collect()
}

/// Alternating partial sum of `levels` up to order `r_cap`.
pub(crate) fn alternate(levels: &[BigRational], r_cap: usize) -> BigRational {
    let mut total = BigRational::zero();
    for (r, level) in levels.iter().enumerate().take(r_cap + 1) {
        if r % 2 == 0 {
            total += level;
        } else {
            total -= level;
        }
    }
    total
}

/// Coefficient of phi(Y) in the lower sum, for every size-k subset Y of B
/// that the truncation sets reach. For independent Y this equals the
/// alternating sigma partial sum of the table with base Y and ambient B,
/// which is the identity the two-sided bound rests on.
pub fn lower_sum_coefficients(
    family: &VectorFamily,
    b: Mask,
    k: usize,
    r1: usize,
) -> Result<BTreeMap<Mask, BigInt>> {
    if r1 % 2 != 1 {
        return Err(Error::InvalidParameter(format!("lower truncation order must be odd, got {r1}")));
    }
    if !is_subset(b, family.full_mask()) {
        return Err(Error::InvalidParameter("B must be a subset of the family".into()));
    }
    let mut coef: BTreeMap<Mask, BigInt> = BTreeMap::new();
    for r in 0..=r1 {
        let sign: i64 = if r % 2 == 0 { 1 } else { -1 };
        family.walk_k_subsets(b, k + r, SieveVariant::Lower.max_deficiency(r), &mut |x, _| {
            for y in k_subsets(x, k) {
                *coef.entry(y).or_default() += sign;
            }
        });
    }
    Ok(coef)
}
