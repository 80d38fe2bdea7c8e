//! Samplers for the Haar probability measure on covolume-one lattices.
//!
//! General dimension uses a Markov chain: each step multiplies the basis on
//! the left by a Haar-random rotation composed with a random elementary
//! shear (unit diagonal, one Gaussian off-diagonal entry). Both factors
//! have determinant one and left translation preserves the Haar measure on
//! the space of lattices, so the chain is stationary for it; rotations and
//! shears together generate the whole unimodular group, which makes the
//! chain mix. The determinant is renormalized every step (drift beyond
//! 1e-6 aborts rather than silently renormalizing garbage) and the basis is
//! LLL-reduced every step so coordinates stay well conditioned along
//! arbitrarily long runs; reduction changes the basis, never the lattice.
//!
//! Dimension two also has an exact sampler: the classical fundamental
//! domain of the modular group carries the stationary density 1/y^2, which
//! is sampled by inversion on an enclosing strip plus rejection, and the
//! resulting torus point is dressed with an independent uniform rotation.
//! It exists to cross-validate the walk against ground truth.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::lattice::lll::lll_reduce;
use crate::lattice::{Provenance, SamplerId, UnimodularLattice, DET_DRIFT_LIMIT, DET_TOL};
use crate::seeding::stream_rng;
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct ChainParams {
    /// Steps taken before the first sample.
    pub burnin: u64,
    /// Steps between consecutive samples.
    pub thin: u64,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams { burnin: 5000, thin: 50 }
    }
}

/// The sampling walk. Deterministic in (dimension, seed, params).
pub struct LatticeChain {
    n: usize,
    basis: DMatrix<f64>,
    rng: rand_chacha::ChaCha8Rng,
    params: ChainParams,
    seed: u64,
    produced: u64,
}

impl LatticeChain {
    pub fn new(n: usize, seed: u64, params: ChainParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be at least 1".into()));
        }
        Ok(LatticeChain {
            n,
            basis: DMatrix::identity(n, n),
            rng: stream_rng(seed, "lattice.chain", 0),
            params,
            seed,
            produced: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn step(&mut self) -> Result<()> {
        if self.n == 1 {
            return Ok(());
        }
        // Shear: add a Gaussian multiple of one basis row to another.
        let i = self.rng.random_range(0..self.n);
        let mut j = self.rng.random_range(0..self.n);
        while j == i {
            j = self.rng.random_range(0..self.n);
        }
        let t: f64 = self.rng.sample(StandardNormal);
        for c in 0..self.n {
            let add = t * self.basis[(j, c)];
            self.basis[(i, c)] += add;
        }
        // Rotation: Haar on SO(n) via sign-fixed QR of a Gaussian matrix.
        let rot = random_rotation(self.n, &mut self.rng);
        self.basis = rot * &self.basis;

        let det = self.basis.determinant();
        if !((det - 1.0).abs() <= DET_DRIFT_LIMIT) {
            return Err(Error::DeterminantDrift { det });
        }
        self.basis *= det.powf(-1.0 / self.n as f64);
        self.basis = lll_reduce(&self.basis);
        let det = self.basis.determinant();
        if det < 0.0 {
            // LLL swaps may flip orientation; negating one generator
            // restores det = +1 without changing the lattice.
            self.basis.column_mut(0).neg_mut();
        }
        if !((det.abs() - 1.0).abs() <= DET_TOL) {
            return Err(Error::DeterminantDrift { det });
        }
        Ok(())
    }

    fn advance(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Next sample: burn-in before the first, thinning between the rest.
    pub fn next_lattice(&mut self) -> Result<UnimodularLattice> {
        let steps = if self.produced == 0 { self.params.burnin } else { self.params.thin };
        self.advance(steps)?;
        self.produced += 1;
        UnimodularLattice::from_basis_with_provenance(
            self.basis.clone(),
            Provenance {
                sampler: SamplerId::McmcWalk,
                chain_seed: self.seed,
                burnin: self.params.burnin,
                thin: self.params.thin,
            },
        )
    }
}

/// One-shot sample after `steps` walk steps from the integer lattice.
pub fn haar_sample(n: usize, seed: u64, steps: u64) -> Result<UnimodularLattice> {
    let mut chain = LatticeChain::new(n, seed, ChainParams { burnin: steps, thin: 1 })?;
    chain.next_lattice()
}

/// Haar-random rotation: QR of an iid Gaussian matrix with the R-diagonal
/// sign fix, then a column flip if the determinant landed in O(n) \ SO(n).
fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r_diag: Vec<f64> = (0..n).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (i, d) in r_diag.iter().enumerate() {
        if *d < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        let last = n - 1;
        q.column_mut(last).neg_mut();
    }
    q
}

/// Exact dimension-2 sampler.
///
/// Shape: draw (x, y) with density proportional to 1/y^2 on the fundamental
/// domain |x| <= 1/2, x^2 + y^2 >= 1. The enclosing strip y >= sqrt(3)/2
/// has the y-marginal available in closed form (inverse CDF
/// y = sqrt(3) / (2 (1 - u))), and rejection against the circle condition
/// accepts with probability about 0.907. The covolume-one basis for shape
/// (x, y) is columns (1/sqrt(y), 0) and (x/sqrt(y), sqrt(y)); a uniform
/// rotation finishes the job, since the lattice shape only determines the
/// basis up to rotation.
pub fn haar_sample_exact_2d<R: Rng + ?Sized>(rng: &mut R) -> UnimodularLattice {
    let (x, y) = fundamental_domain_sample(rng);
    let s = y.sqrt();
    let basis = DMatrix::from_column_slice(2, 2, &[1.0 / s, 0.0, x / s, s]);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let (sin, cos) = theta.sin_cos();
    let rot = DMatrix::from_column_slice(2, 2, &[cos, sin, -sin, cos]);
    UnimodularLattice::from_basis_with_provenance(
        rot * basis,
        Provenance { sampler: SamplerId::ExactDim2, chain_seed: 0, burnin: 0, thin: 0 },
    )
    .expect("construction is unimodular by design")
}

/// (x, y) on the fundamental domain with density proportional to 1/y^2.
pub fn fundamental_domain_sample<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u: f64 = rng.random();
        let y = 3.0f64.sqrt() / (2.0 * (1.0 - u));
        let x = rng.random_range(-0.5..0.5);
        if x * x + y * y >= 1.0 {
            return (x, y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Region;
    use crate::stats::mean_and_stderr;

    #[test]
    fn rotations_are_special_orthogonal() {
        let mut rng = stream_rng(1, "test.rot", 0);
        for n in 2..=6 {
            for _ in 0..20 {
                let q = random_rotation(n, &mut rng);
                let gram = &q * q.transpose();
                assert!((gram - DMatrix::<f64>::identity(n, n)).norm() < 1e-10);
                assert!((q.determinant() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn chain_keeps_unit_determinant() {
        let mut chain = LatticeChain::new(4, 9, ChainParams { burnin: 50, thin: 5 }).unwrap();
        for _ in 0..40 {
            let lat = chain.next_lattice().unwrap();
            assert!((lat.det() - 1.0).abs() <= DET_TOL);
        }
    }

    #[test]
    fn chain_is_deterministic_in_seed() {
        let sample = |seed: u64| {
            let mut chain = LatticeChain::new(3, seed, ChainParams { burnin: 100, thin: 10 }).unwrap();
            (0..5).map(|_| chain.next_lattice().unwrap().basis().clone()).collect::<Vec<_>>()
        };
        assert_eq!(sample(7), sample(7));
        assert_ne!(sample(7), sample(8));
    }

    #[test]
    fn fundamental_domain_tail_probabilities() {
        // P(y > c) = (1/c) / (pi/3) for c >= 1, since the slab {y > c} lies
        // entirely inside the domain and carries mass 1/c.
        let mut rng = stream_rng(3, "test.fd", 0);
        let trials = 60_000;
        let mut hits2 = 0u32;
        let mut hits15 = 0u32;
        for _ in 0..trials {
            let (x, y) = fundamental_domain_sample(&mut rng);
            assert!((-0.5..=0.5).contains(&x));
            assert!(x * x + y * y >= 1.0);
            if y > 2.0 {
                hits2 += 1;
            }
            if y > 1.5 {
                hits15 += 1;
            }
        }
        let check = |hits: u32, p: f64| {
            let phat = f64::from(hits) / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((phat - p).abs() < 4.0 * se, "got {phat}, want {p} (se {se})");
        };
        check(hits2, 0.5 / (std::f64::consts::PI / 3.0));
        check(hits15, (1.0 / 1.5) / (std::f64::consts::PI / 3.0));
    }

    #[test]
    fn exact_2d_mean_count_matches_region_volume() {
        // The expected number of lattice points in a region equals its
        // volume, a closed-form identity the exact sampler must reproduce.
        let mut rng = stream_rng(5, "test.siegel2d", 0);
        let region = Region::half_ball_with_volume(2, 0.4).unwrap();
        let radius = region.circumradius();
        let trials = 30_000;
        let counts: Vec<f64> = (0..trials)
            .map(|_| {
                let lat = haar_sample_exact_2d(&mut rng);
                lat.enumerate_in_ball(radius, 10_000)
                    .unwrap()
                    .iter()
                    .filter(|p| region.contains_unchecked(&p.coords))
                    .count() as f64
            })
            .collect();
        let (mean, se) = mean_and_stderr(&counts);
        assert!(
            (mean - 0.4).abs() < 4.0 * se,
            "mean count {mean} vs volume 0.4 (se {se})"
        );
    }

    #[test]
    fn walk_agrees_with_exact_sampler_in_dimension_two() {
        // Two-sample comparison of the mean point count in a fixed region.
        let region = Region::half_ball_with_volume(2, 0.5).unwrap();
        let radius = region.circumradius();
        let count_in = |lat: &UnimodularLattice| {
            lat.enumerate_in_ball(radius, 10_000)
                .unwrap()
                .iter()
                .filter(|p| region.contains_unchecked(&p.coords))
                .count() as f64
        };
        let mut chain = LatticeChain::new(2, 41, ChainParams::default()).unwrap();
        let walk: Vec<f64> = (0..4000).map(|_| count_in(&chain.next_lattice().unwrap())).collect();
        let mut rng = stream_rng(42, "test.exact2d", 0);
        let exact: Vec<f64> =
            (0..20_000).map(|_| count_in(&haar_sample_exact_2d(&mut rng))).collect();
        let (m1, se1) = mean_and_stderr(&walk);
        let (m2, se2) = mean_and_stderr(&exact);
        let z = (m1 - m2) / (se1 * se1 + se2 * se2).sqrt();
        assert!(z.abs() < 4.0, "walk mean {m1} vs exact mean {m2}: z = {z}");
    }
}
