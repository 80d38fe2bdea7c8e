//! Two-sided alternating bounds on the indicator of full independence.
//!
//! Fix a family, an independent base subset A, and an ambient subset B with
//! A inside B, and let N = |B \ A|. Classify each Y inside B \ A by the
//! deficiency of A + Y. With
//!
//!   P_r = { Y : |Y| = r, delta(A + Y) = 0 }    p_r = |P_r| / C(N, r)
//!   Q_r = { Y : |Y| = r, delta(A + Y) <= 1 }   q_r = |Q_r| / C(N, r)
//!
//! the sigma row takes the strict count at even r and the slack count at odd
//! r, and the tau row the opposite:
//!
//!   sigma_r = |P_r| (r even), |Q_r| (r odd)
//!   tau_r   = |Q_r| (r even), |P_r| (r odd)
//!
//! The alternating partial sums of sigma (truncated at odd order) never
//! exceed the indicator of A = B, and those of tau (truncated at even order)
//! never fall below it. This is the deficiency analogue of the classic
//! even/odd truncation bounds of inclusion-exclusion, which are also
//! provided here in their plain counting form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::comb::binomial;
use crate::error::Error;
use crate::sieve::mask::{is_subset, mask_indices, mask_len, Mask};
use crate::sieve::{EchelonBasis, VectorFamily};
use crate::Result;

/// Exact sieve table for one (family, A, B) instance.
#[derive(Clone, Debug)]
pub struct SieveTable {
    /// N = |B \ A|.
    pub complement_size: usize,
    pub r_max: usize,
    /// sigma_r and tau_r for r = 0..=r_max (zero beyond N).
    pub sigma: Vec<BigInt>,
    pub tau: Vec<BigInt>,
    /// Alternating partial sums: sum of (-1)^j row_j for j <= r.
    pub sigma_partial: Vec<BigInt>,
    pub tau_partial: Vec<BigInt>,
    /// p_r = |P_r| / C(N, r) and q_r = |Q_r| / C(N, r) for r = 0..=N.
    pub p: Vec<BigRational>,
    pub q: Vec<BigRational>,
    /// c_r = sum of (-1)^j C(N, j) for j <= r, which collapses to
    /// (-1)^r C(N-1, r) when N >= 1.
    pub c: Vec<BigInt>,
}

impl SieveTable {
    /// Check every structural property the table must satisfy: probability
    /// bounds 0 <= p_r <= q_r <= 1, both rows non-increasing in r, the
    /// cross bound p_r <= q_(r+1), and the collapsed form of c_r. Returns
    /// human-readable violations; an empty list means the table is sound.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.complement_size;
        let one = BigRational::one();
        for r in 0..=n {
            if self.p[r] < BigRational::zero() || self.p[r] > self.q[r] || self.q[r] > one {
                out.push(format!("order violation at r={r}: p={}, q={}", self.p[r], self.q[r]));
            }
        }
        for r in 1..=n {
            if self.p[r] > self.p[r - 1] {
                out.push(format!("p increased at r={r}"));
            }
            if self.q[r] > self.q[r - 1] {
                out.push(format!("q increased at r={r}"));
            }
        }
        for r in 0..n {
            if self.p[r] > self.q[r + 1] {
                out.push(format!("p_{r} exceeds q_{}", r + 1));
            }
        }
        for (r, c) in self.c.iter().enumerate() {
            let collapsed = if n >= 1 {
                let sign = if r % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                sign * binomial(n - 1, r)
            } else {
                BigInt::one()
            };
            if *c != collapsed {
                out.push(format!("c_{r} = {c}, collapsed form {collapsed}"));
            }
        }
        out
    }
}

/// Compute the sigma/tau table for base A inside ambient B.
///
/// A must be linearly independent; subsets of B \ A are enumerated
/// depth-first on top of A's echelon basis, cutting branches whose
/// deficiency already exceeds 1 (deficiency is monotone, and such subsets
/// are counted by neither row).
pub fn sigma_tau(family: &VectorFamily, a: Mask, b: Mask, r_max: usize) -> Result<SieveTable> {
    if !is_subset(b, family.full_mask()) || !is_subset(a, b) {
        return Err(Error::InvalidParameter(
            "need A inside B inside the family".into(),
        ));
    }
    if family.rank_of(a)? != mask_len(a) {
        return Err(Error::DependentBase);
    }
    let pool: Vec<usize> = mask_indices(b & !a).collect();
    let n = pool.len();

    let mut count_strict = vec![0u64; n + 1]; // |P_r|: deficiency 0
    let mut count_slack = vec![0u64; n + 1]; // |Q_r|: deficiency <= 1
    let mut basis = family.echelon_of(a);
    count_subsets(family, &pool, 0, 0, 0, &mut basis, &mut count_strict, &mut count_slack);

    let sigma: Vec<BigInt> = (0..=r_max)
        .map(|r| {
            if r > n {
                BigInt::zero()
            } else if r % 2 == 0 {
                BigInt::from(count_strict[r])
            } else {
                BigInt::from(count_slack[r])
            }
        })
        .collect();
    let tau: Vec<BigInt> = (0..=r_max)
        .map(|r| {
            if r > n {
                BigInt::zero()
            } else if r % 2 == 0 {
                BigInt::from(count_slack[r])
            } else {
                BigInt::from(count_strict[r])
            }
        })
        .collect();

    let alternating = |row: &[BigInt]| -> Vec<BigInt> {
        let mut acc = BigInt::zero();
        row.iter()
            .enumerate()
            .map(|(r, x)| {
                if r % 2 == 0 {
                    acc += x;
                } else {
                    acc -= x;
                }
                acc.clone()
            })
            .collect()
    };
    let sigma_partial = alternating(&sigma);
    let tau_partial = alternating(&tau);

    let ratio = |count: u64, r: usize| {
        BigRational::new(BigInt::from(count), binomial(n, r))
    };
    let p: Vec<BigRational> = (0..=n).map(|r| ratio(count_strict[r], r)).collect();
    let q: Vec<BigRational> = (0..=n).map(|r| ratio(count_slack[r], r)).collect();

    let c: Vec<BigInt> = (0..=r_max)
        .map(|r| {
            if n >= 1 {
                let sign = if r % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                sign * binomial(n - 1, r)
            } else {
                BigInt::one()
            }
        })
        .collect();

    Ok(SieveTable { complement_size: n, r_max, sigma, tau, sigma_partial, tau_partial, p, q, c })
}

#[allow(clippy::too_many_arguments)]
fn count_subsets(
    family: &VectorFamily,
    pool: &[usize],
    pos: usize,
    size: usize,
    fails: usize,
    basis: &mut EchelonBasis,
    strict: &mut [u64],
    slack: &mut [u64],
) {
    if pos == pool.len() {
        if fails == 0 {
            strict[size] += 1;
        }
        slack[size] += 1;
        return;
    }
    // Exclude pool[pos].
    count_subsets(family, pool, pos + 1, size, fails, basis, strict, slack);
    // Include it, unless deficiency would exceed 1.
    let grew = basis.push(family.vector(pool[pos]));
    let new_fails = fails + usize::from(!grew);
    if new_fails <= 1 {
        count_subsets(family, pool, pos + 1, size + 1, new_fails, basis, strict, slack);
    }
    basis.pop();
}

/// Result of one two-sided bound check.
#[derive(Clone, Debug)]
pub struct LemmaCheck {
    pub lower: BigInt,
    pub upper: BigInt,
    pub indicator: bool,
    pub ok: bool,
    pub table: SieveTable,
}

/// Evaluate the two-sided truncation bound: the alternating sigma sum up to
/// odd order `r1` must not exceed the indicator of A = B, and the
/// alternating tau sum up to even order `r2` must not fall below it.
pub fn check_truncation_bounds(
    family: &VectorFamily,
    a: Mask,
    b: Mask,
    r1: usize,
    r2: usize,
) -> Result<LemmaCheck> {
    if r1 % 2 != 1 {
        return Err(Error::InvalidParameter(format!("lower truncation order must be odd, got {r1}")));
    }
    if r2 % 2 != 0 {
        return Err(Error::InvalidParameter(format!("upper truncation order must be even, got {r2}")));
    }
    let table = sigma_tau(family, a, b, r1.max(r2))?;
    let lower = table.sigma_partial[r1].clone();
    let upper = table.tau_partial[r2].clone();
    let indicator = a == b;
    let ind = BigInt::from(u8::from(indicator));
    let ok = lower <= ind && ind <= upper;
    Ok(LemmaCheck { lower, upper, indicator, ok, table })
}

/// Classic truncated inclusion-exclusion bounds in counting form: given
/// that `occurred` of the events happened, the alternating binomial sums
/// bracket the indicator that none did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicBounds {
    pub lower: BigInt,
    pub upper: BigInt,
    pub indicator: bool,
    pub ok: bool,
}

pub fn classic_inclusion_exclusion_bounds(
    occurred: usize,
    r1: usize,
    r2: usize,
) -> Result<ClassicBounds> {
    if r1 % 2 != 1 || r2 % 2 != 0 {
        return Err(Error::InvalidParameter(
            "classic bounds need odd lower and even upper truncation orders".into(),
        ));
    }
    let partial = |r: usize| -> BigInt {
        let mut acc = BigInt::zero();
        for j in 0..=r {
            let term = binomial(occurred, j);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    };
    let lower = partial(r1);
    let upper = partial(r2);
    let indicator = occurred == 0;
    let ind = BigInt::from(u8::from(indicator));
    let ok = lower <= ind && ind <= upper;
    Ok(ClassicBounds { lower, upper, indicator, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::exact_rank;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A = {e1}, B = {e1, e2, 2 e2} in Z^2, worked by hand:
    /// complement {e2, 2 e2}, N = 2; the only deficient subset is the full
    /// pair (deficiency 1), so |P| = (1, 2, 0) and |Q| = (1, 2, 1).
    #[test]
    fn hand_table_values() {
        let f = VectorFamily::from_rows_i64(2, &[vec![1, 0], vec![0, 1], vec![0, 2]]).unwrap();
        let t = sigma_tau(&f, 0b001, 0b111, 2).unwrap();
        assert_eq!(t.complement_size, 2);
        let big = |x: i64| BigInt::from(x);
        assert_eq!(t.sigma, vec![big(1), big(2), big(0)]);
        assert_eq!(t.tau, vec![big(1), big(2), big(1)]);
        assert_eq!(t.sigma_partial, vec![big(1), big(-1), big(-1)]);
        assert_eq!(t.tau_partial, vec![big(1), big(-1), big(0)]);
        let rat = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(t.p, vec![rat(1, 1), rat(1, 1), rat(0, 1)]);
        assert_eq!(t.q, vec![rat(1, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(t.c, vec![big(1), big(-1), big(0)]);
        assert!(t.invariant_violations().is_empty());

        let check = check_truncation_bounds(&f, 0b001, 0b111, 1, 2).unwrap();
        assert_eq!(check.lower, big(-1));
        assert_eq!(check.upper, big(0));
        assert!(!check.indicator);
        assert!(check.ok);
    }

    #[test]
    fn equal_base_and_ambient() {
        let f = VectorFamily::from_rows_i64(2, &[vec![1, 0], vec![0, 1]]).unwrap();
        let t = sigma_tau(&f, 0b11, 0b11, 3).unwrap();
        assert_eq!(t.complement_size, 0);
        assert!(t.sigma_partial.iter().all(|x| *x == BigInt::one()));
        assert!(t.c.iter().all(|x| *x == BigInt::one()));
        let check = check_truncation_bounds(&f, 0b11, 0b11, 1, 0).unwrap();
        assert!(check.indicator && check.ok);
        assert_eq!(check.lower, BigInt::one());
        assert_eq!(check.upper, BigInt::one());
    }

    #[test]
    fn validation_errors() {
        let f = VectorFamily::from_rows_i64(2, &[vec![1, 0], vec![2, 0], vec![0, 1]]).unwrap();
        // A = {e1, 2 e1} is dependent.
        assert!(matches!(sigma_tau(&f, 0b011, 0b111, 2), Err(Error::DependentBase)));
        // A not inside B.
        assert!(sigma_tau(&f, 0b001, 0b110, 2).is_err());
        // Parity rules.
        assert!(check_truncation_bounds(&f, 0b001, 0b111, 2, 2).is_err());
        assert!(check_truncation_bounds(&f, 0b001, 0b111, 1, 1).is_err());
        assert!(classic_inclusion_exclusion_bounds(3, 2, 2).is_err());
    }

    #[test]
    fn classic_bounds_hand_and_exhaustive() {
        let b = classic_inclusion_exclusion_bounds(5, 1, 2).unwrap();
        assert_eq!(b.lower, BigInt::from(-4));
        assert_eq!(b.upper, BigInt::from(6));
        assert!(b.ok);
        let z = classic_inclusion_exclusion_bounds(0, 3, 4).unwrap();
        assert_eq!(z.lower, BigInt::one());
        assert_eq!(z.upper, BigInt::one());
        assert!(z.ok && z.indicator);
        for occurred in 0..=8 {
            for r1 in (1..=9).step_by(2) {
                for r2 in (0..=8).step_by(2) {
                    assert!(
                        classic_inclusion_exclusion_bounds(occurred, r1, r2).unwrap().ok,
                        "occurred={occurred} r1={r1} r2={r2}"
                    );
                }
            }
        }
    }

    /// Exhaustive reference for sigma/tau on one instance.
    fn brute_table(
        f: &VectorFamily,
        a: Mask,
        b: Mask,
    ) -> (Vec<u64>, Vec<u64>) {
        let pool: Vec<usize> = mask_indices(b & !a).collect();
        let n = pool.len();
        let mut strict = vec![0u64; n + 1];
        let mut slack = vec![0u64; n + 1];
        for sel in 0..(1u32 << n) {
            let mut rows: Vec<Vec<BigInt>> =
                mask_indices(a).map(|i| f.vector(i).to_vec()).collect();
            let mut size = 0;
            for (bit, &idx) in pool.iter().enumerate() {
                if sel >> bit & 1 == 1 {
                    rows.push(f.vector(idx).to_vec());
                    size += 1;
                }
            }
            let def = rows.len() - exact_rank(&rows);
            if def == 0 {
                strict[size] += 1;
            }
            if def <= 1 {
                slack[size] += 1;
            }
        }
        (strict, slack)
    }

    #[test]
    fn table_matches_brute_force_and_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..150 {
            let dim = rng.random_range(1..=4);
            let m = rng.random_range(1..=7usize);
            let rows: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..dim).map(|_| rng.random_range(-2i64..=2)).collect())
                .collect();
            let f = VectorFamily::from_rows_i64(dim, &rows).unwrap();
            let b = f.full_mask();
            // Grow a random independent A inside B (possibly empty, sometimes B).
            let mut a: Mask = 0;
            for i in 0..m {
                if rng.random_bool(0.5) {
                    let cand = a | (1 << i);
                    if f.rank_of(cand).unwrap() == mask_len(cand) {
                        a = cand;
                    }
                }
            }
            let t = sigma_tau(&f, a, b, 6).unwrap();
            let (strict, slack) = brute_table(&f, a, b);
            let n = t.complement_size;
            for r in 0..=6usize {
                let (s, tau) = if r > n {
                    (0, 0)
                } else if r % 2 == 0 {
                    (strict[r], slack[r])
                } else {
                    (slack[r], strict[r])
                };
                assert_eq!(t.sigma[r], BigInt::from(s), "sigma r={r}");
                assert_eq!(t.tau[r], BigInt::from(tau), "tau r={r}");
            }
            assert!(t.invariant_violations().is_empty(), "{:?}", t.invariant_violations());
            for r1 in [1usize, 3, 5] {
                for r2 in [0usize, 2, 4] {
                    let check = check_truncation_bounds(&f, a, b, r1, r2).unwrap();
                    assert!(check.ok, "bounds failed: rows={rows:?} a={a:#b} r1={r1} r2={r2}");
                }
            }
        }
    }
}
