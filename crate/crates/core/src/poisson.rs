//! The unit-intensity Poisson process on a bounded region.
//!
//! Restricted to a region of volume v, the process is an ordinary Poisson(v)
//! number of independent uniform points. Counts are sampled by inversion
//! (sequential CDF search), which is exact and cheap because every use here
//! keeps the mean small; the implementation refuses means beyond 30 where
//! the linear search would start to be the wrong tool.

use rand::Rng;

use crate::error::Error;
use crate::points::{ConfigSource, PointConfig};
use crate::region::Region;
use crate::Result;

pub const MAX_POISSON_MEAN: f64 = 30.0;

/// P(N = k) for N ~ Poisson(lambda), in log space.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    assert!(lambda > 0.0, "pmf needs a positive mean");
    let ln_k_factorial: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    (k as f64 * lambda.ln() - lambda - ln_k_factorial).exp()
}

/// Poisson count by inversion of the CDF.
pub fn sample_poisson_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !(lambda > 0.0 && lambda <= MAX_POISSON_MEAN) {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean must lie in (0, {MAX_POISSON_MEAN}], got {lambda}"
        )));
    }
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    while u >= cdf && pmf > 1e-300 {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
    }
    Ok(k)
}

/// Sample the process restricted to `region`: a Poisson(volume) count of
/// independent uniform points.
pub fn sample_poisson<R: Rng + ?Sized>(region: &Region, rng: &mut R) -> Result<PointConfig> {
    let n = sample_poisson_count(region.volume(), rng)?;
    let points: Vec<Vec<f64>> = (0..n).map(|_| region.sample_uniform(rng)).collect();
    PointConfig::new(region.dim(), points, None, ConfigSource::Poisson)
}
