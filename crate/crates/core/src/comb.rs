//! Small exact combinatorics helpers shared by the sieve and the estimators.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Floating-point factorial, exact for every `k` that fits the mantissa.
pub fn factorial_f64(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}
