//! Rank-deficiency counting over finite families of integer vectors.
//!
//! The central objects are a finite family of vectors in Z^d (a multiset;
//! duplicates and zero vectors are perfectly legal) and its subsets,
//! identified by bitmask. For a subset X the deficiency
//!
//!   delta(X) = |X| - rank(X)
//!
//! measures how far X is from linear independence, and iota(X) = 1 exactly
//! when delta(X) = 0. The module computes, exactly:
//!
//! * `rho`: the number of k-subsets of a given rank,
//! * `count_dk`: independent k-subsets that some further family member
//!   fails to extend (it lands in their span),
//! * `sieve_set_count`: the truncation sets of the two-sided deficiency
//!   sieve: (k+r)-subsets whose deficiency is at most 1 on the slack parity
//!   and 0 on the other,
//! * sigma/tau tables with the alternating partial sums that bracket the
//!   indicator of full independence (`table`), and the weighted
//!   generalization against a nonnegative test functional (`functional`).
//!
//! Everything is exact integer or rational arithmetic; nothing here touches
//! floating point except the advisory `approx_rank` cross-check. Subset
//! enumeration is depth-first with an incremental echelon basis, pruning on
//! deficiency (deficiency never decreases as a subset grows), so sieve
//! counts cost far less than 2^|B| on dependency-rich families.

pub mod battery;
pub mod elim;
pub mod functional;
pub mod mask;
pub mod table;

use num_bigint::BigInt;

pub use battery::{run_sieve_battery, BatteryParams, BatteryReport};
pub use elim::{approx_rank, exact_rank, EchelonBasis};
pub use functional::{check_prop_sieve, lower_sum_coefficients, PropCheck, TestFunctional};
pub use mask::{is_subset, k_subsets, mask_from_indices, mask_indices, mask_len, Mask};
pub use table::{
    check_truncation_bounds, classic_inclusion_exclusion_bounds, sigma_tau, ClassicBounds,
    LemmaCheck, SieveTable,
};

use crate::error::Error;
use crate::Result;

/// Hard cap on family size for subset enumeration.
pub const MAX_FAMILY: usize = 25;
/// Tighter cap when a test functional multiplies the inner sums.
pub const MAX_FAMILY_WITH_FUNCTIONAL: usize = 20;

/// Which side of the two-sided sieve a truncation set belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SieveVariant {
    /// Deficiency slack 1 at odd co-size (lower bounds).
    Lower,
    /// Deficiency slack 1 at even co-size (upper bounds).
    Upper,
}

impl SieveVariant {
    /// Maximum admissible deficiency for a set of co-size r.
    pub fn max_deficiency(self, r: usize) -> usize {
        match self {
            SieveVariant::Lower => usize::from(r % 2 == 1),
            SieveVariant::Upper => usize::from(r % 2 == 0),
        }
    }
}

/// A finite ordered family of integer vectors, all of the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<Vec<BigInt>>,
}

impl VectorFamily {
    pub fn new(dim: usize, vectors: Vec<Vec<BigInt>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("family dimension must be at least 1".into()));
        }
        if vectors.len() > MAX_FAMILY {
            return Err(Error::FamilyTooLarge { size: vectors.len(), cap: MAX_FAMILY });
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
        }
        Ok(VectorFamily { dim, vectors })
    }

    pub fn from_rows_i64(dim: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let vectors = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        VectorFamily::new(dim, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[BigInt] {
        &self.vectors[i]
    }

    pub fn full_mask(&self) -> Mask {
        if self.vectors.is_empty() {
            0
        } else {
            (1u32 << self.vectors.len()) - 1
        }
    }

    fn check_mask(&self, m: Mask) -> Result<()> {
        if !is_subset(m, self.full_mask()) {
            return Err(Error::InvalidParameter(format!(
                "mask {m:#b} selects vectors outside the family of {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// Echelon basis of the selected vectors, pushed in index order.
    pub fn echelon_of(&self, m: Mask) -> EchelonBasis {
        let mut basis = EchelonBasis::new(self.dim);
        for i in mask_indices(m) {
            basis.push(&self.vectors[i]);
        }
        basis
    }

    /// Exact rank of the selected subset; basis-independent by construction.
    pub fn rank_of(&self, m: Mask) -> Result<usize> {
        self.check_mask(m)?;
        Ok(self.echelon_of(m).rank())
    }

    /// delta(X) = |X| - rank(X).
    pub fn rank_deficiency(&self, m: Mask) -> Result<usize> {
        Ok(mask_len(m) - self.rank_of(m)?)
    }

    /// Indicator of linear independence; iota(empty) = 1.
    pub fn iota(&self, m: Mask) -> Result<u64> {
        Ok(u64::from(self.rank_deficiency(m)? == 0))
    }

    /// Number of k-subsets of `b` whose rank is exactly `j`.
    pub fn rho(&self, b: Mask, k: usize, j: usize) -> Result<u64> {
        self.check_mask(b)?;
        if j > k || j > self.dim {
            return Ok(0);
        }
        let mut count = 0u64;
        self.walk_k_subsets(b, k, k - j, &mut |_, basis| {
            if basis.rank() == j {
                count += 1;
            }
        });
        Ok(count)
    }

    /// Number of independent k-subsets Y of `b` such that some v in b \ Y
    /// lies in the span of Y (equivalently, delta(Y + v) = 1).
    pub fn count_dk(&self, b: Mask, k: usize) -> Result<u64> {
        self.check_mask(b)?;
        let pool: Vec<usize> = mask_indices(b).collect();
        let mut count = 0u64;
        self.walk_k_subsets(b, k, 0, &mut |m, basis| {
            let blocked = pool
                .iter()
                .any(|&v| m >> v & 1 == 0 && basis.in_span(&self.vectors[v]));
            if blocked {
                count += 1;
            }
        });
        Ok(count)
    }

    /// Size of the sieve truncation set: (k+r)-subsets X of `b` with
    /// delta(X) at most the variant's slack at co-size r.
    pub fn sieve_set_count(&self, b: Mask, k: usize, r: usize, variant: SieveVariant) -> Result<u64> {
        self.check_mask(b)?;
        let mut count = 0u64;
        self.walk_k_subsets(b, k + r, variant.max_deficiency(r), &mut |_, _| count += 1);
        Ok(count)
    }

    /// Visit every `size`-subset of `b` whose deficiency is at most
    /// `max_deficiency`, depth-first in index order. Deficiency is monotone
    /// under inclusion, so branches that already exceed the bound are cut.
    pub(crate) fn walk_k_subsets(
        &self,
        b: Mask,
        size: usize,
        max_deficiency: usize,
        at_leaf: &mut dyn FnMut(Mask, &EchelonBasis),
    ) {
        let pool: Vec<usize> = mask_indices(b).collect();
        if size > pool.len() {
            return;
        }
        let mut basis = EchelonBasis::new(self.dim);
        self.walk_rec(&pool, 0, size, 0, max_deficiency, 0, &mut basis, at_leaf);
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_rec(
        &self,
        pool: &[usize],
        pos: usize,
        remaining: usize,
        fails: usize,
        max_def: usize,
        mask: Mask,
        basis: &mut EchelonBasis,
        at_leaf: &mut dyn FnMut(Mask, &EchelonBasis),
    ) {
        if remaining == 0 {
            at_leaf(mask, basis);
            return;
        }
        if pool.len() - pos < remaining {
            return;
        }
        let idx = pool[pos];
        let grew = basis.push(&self.vectors[idx]);
        let new_fails = fails + usize::from(!grew);
        if new_fails <= max_def {
            self.walk_rec(
                pool,
                pos + 1,
                remaining - 1,
                new_fails,
                max_def,
                mask | (1 << idx),
                basis,
                at_leaf,
            );
        }
        basis.pop();
        self.walk_rec(pool, pos + 1, remaining, fails, max_def, mask, basis, at_leaf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// e1, e2, 2 e2, 0 in Z^2: small enough to audit by hand.
    fn sample_family() -> VectorFamily {
        VectorFamily::from_rows_i64(
            2,
            &[vec![1, 0], vec![0, 1], vec![0, 2], vec![0, 0]],
        )
        .unwrap()
    }

    #[test]
    fn rank_and_iota_hand_values() {
        let f = sample_family();
        assert_eq!(f.rank_of(0b0000).unwrap(), 0);
        assert_eq!(f.iota(0b0000).unwrap(), 1, "empty set is independent");
        assert_eq!(f.rank_of(0b1000).unwrap(), 0, "zero vector has rank 0");
        assert_eq!(f.iota(0b1000).unwrap(), 0);
        assert_eq!(f.rank_of(0b0110).unwrap(), 1, "e2 and 2 e2 are parallel");
        assert_eq!(f.rank_of(0b0111).unwrap(), 2);
        assert_eq!(f.rank_deficiency(0b1111).unwrap(), 2);
    }

    #[test]
    fn rho_hand_values() {
        let f = sample_family();
        let b = f.full_mask();
        // Pairs: {e1,e2} and {e1,2e2} have rank 2; the other four pairs rank 1.
        assert_eq!(f.rho(b, 2, 2).unwrap(), 2);
        assert_eq!(f.rho(b, 2, 1).unwrap(), 4);
        assert_eq!(f.rho(b, 2, 0).unwrap(), 0);
        assert_eq!(f.rho(b, 1, 0).unwrap(), 1, "only the zero vector");
        assert_eq!(f.rho(b, 0, 0).unwrap(), 1, "the empty subset");
        assert_eq!(f.rho(b, 3, 4).unwrap(), 0, "rank cannot exceed size");
    }

    #[test]
    fn count_dk_hand_values() {
        let f = sample_family();
        let b = f.full_mask();
        // Every independent singleton is blocked: 0 lies in every span.
        assert_eq!(f.count_dk(b, 1).unwrap(), 3);
        // The empty set is blocked by the zero vector alone.
        assert_eq!(f.count_dk(b, 0).unwrap(), 1);
        // Independent pairs {e1,e2}, {e1,2e2}: each blocked (by 2e2 resp. e2).
        assert_eq!(f.count_dk(b, 2).unwrap(), 2);
        // Without the zero vector, no singleton is blocked except the
        // parallel pair members.
        let g = VectorFamily::from_rows_i64(2, &[vec![1, 0], vec![0, 1], vec![0, 2]]).unwrap();
        assert_eq!(g.count_dk(g.full_mask(), 1).unwrap(), 2, "e2 blocks 2e2 and vice versa");
        assert_eq!(g.count_dk(g.full_mask(), 0).unwrap(), 0);
    }

    #[test]
    fn sieve_set_hand_values() {
        let f = sample_family();
        let b = f.full_mask();
        // Co-size 1 over k = 1: lower variant allows deficiency 1, so every
        // pair qualifies; upper variant demands independence.
        assert_eq!(f.sieve_set_count(b, 1, 1, SieveVariant::Lower).unwrap(), 6);
        assert_eq!(f.sieve_set_count(b, 1, 1, SieveVariant::Upper).unwrap(), 2);
        // Co-size 0: the lower variant is strict there, the upper grants
        // slack 1, so the upper count covers every pair again.
        assert_eq!(f.sieve_set_count(b, 2, 0, SieveVariant::Lower).unwrap(), 2);
        assert_eq!(f.sieve_set_count(b, 2, 0, SieveVariant::Upper).unwrap(), 6);
    }

    #[test]
    fn counts_match_brute_force_on_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let dim = rng.random_range(1..=4);
            let m = rng.random_range(1..=7usize);
            let rows: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..dim).map(|_| rng.random_range(-2i64..=2)).collect())
                .collect();
            let f = VectorFamily::from_rows_i64(dim, &rows).unwrap();
            let b = f.full_mask();

            // Exhaustive reference: rank of every subset via one-shot Bareiss.
            let mut rank_by_mask = vec![0usize; 1 << m];
            for mask in 0..(1u32 << m) {
                let subset: Vec<Vec<BigInt>> = mask_indices(mask)
                    .map(|i| f.vector(i).to_vec())
                    .collect();
                rank_by_mask[mask as usize] = exact_rank(&subset);
            }

            for k in 0..=m {
                for j in 0..=k {
                    let brute = (0..(1u32 << m))
                        .filter(|&mask| {
                            mask_len(mask) == k && rank_by_mask[mask as usize] == j
                        })
                        .count() as u64;
                    assert_eq!(f.rho(b, k, j).unwrap(), brute, "rho k={k} j={j}");
                }
                let brute_dk = (0..(1u32 << m))
                    .filter(|&mask| {
                        mask_len(mask) == k
                            && rank_by_mask[mask as usize] == k
                            && mask_indices(b).any(|v| {
                                mask >> v & 1 == 0
                                    && rank_by_mask[(mask | 1 << v) as usize] == k
                            })
                    })
                    .count() as u64;
                assert_eq!(f.count_dk(b, k).unwrap(), brute_dk, "dk k={k}");

                for r in 0..=(m - k) {
                    for variant in [SieveVariant::Lower, SieveVariant::Upper] {
                        let brute = (0..(1u32 << m))
                            .filter(|&mask| {
                                mask_len(mask) == k + r
                                    && mask_len(mask) - rank_by_mask[mask as usize]
                                        <= variant.max_deficiency(r)
                            })
                            .count() as u64;
                        assert_eq!(
                            f.sieve_set_count(b, k, r, variant).unwrap(),
                            brute,
                            "sieve k={k} r={r} {variant:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn construction_guards() {
        assert!(VectorFamily::from_rows_i64(2, &[vec![1, 0, 0]]).is_err());
        assert!(VectorFamily::new(0, vec![]).is_err());
        let too_many = vec![vec![BigInt::from(1)]; MAX_FAMILY + 1];
        assert!(matches!(
            VectorFamily::new(1, too_many),
            Err(Error::FamilyTooLarge { size: 26, cap: 25 })
        ));
        let f = sample_family();
        assert!(f.rho(0b10000, 1, 1).is_err(), "mask outside the family");
    }
}
