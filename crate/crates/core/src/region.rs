//! Bounded test regions in R^n, all contained in the open half-space x1 > 0.
//!
//! The regions are deliberately asymmetric: since every point has x1 > 0, a
//! region never contains both x and -x, so counting lattice points in one is
//! not confounded by the lattice's inversion symmetry. Membership uses strict
//! inequalities throughout; the topological boundary is excluded, which keeps
//! membership unambiguous for lattice points that would otherwise land on it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::stats::ln_gamma;
use crate::Result;

/// Natural log of the volume of the unit ball in R^n.
pub fn unit_ball_ln_volume(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * std::f64::consts::PI.ln() - ln_gamma(0.5 * nf + 1.0)
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_ball_ln_volume(n).exp()
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    /// { x1 > 0, |x| < radius }
    HalfBall { radius: f64 },
    /// { x1 > 0, r_in < |x| < r_out }
    HalfShell { r_in: f64, r_out: f64 },
    /// { l_i < x_i < l_i + e_i }, with l_1 > 0 so the box stays off the wall.
    ShiftedBox { lower: Vec<f64>, edges: Vec<f64> },
}

/// A bounded open region in R^n, contained in { x1 > 0 }.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    dim: usize,
    shape: Shape,
}

impl Region {
    pub fn half_ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "half-ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Region { dim, shape: Shape::HalfBall { radius } })
    }

    /// Half-ball whose volume equals `target_volume`, i.e. radius
    /// (2 v Gamma(n/2+1) / pi^(n/2))^(1/n), computed in log space.
    pub fn half_ball_with_volume(dim: usize, target_volume: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(target_volume > 0.0 && target_volume.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "target volume must be positive and finite, got {target_volume}"
            )));
        }
        let ln_r = ((2.0 * target_volume).ln() - unit_ball_ln_volume(dim)) / dim as f64;
        Region::half_ball(dim, ln_r.exp())
    }

    pub fn half_shell(dim: usize, r_in: f64, r_out: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "half-shell needs 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}"
            )));
        }
        Ok(Region { dim, shape: Shape::HalfShell { r_in, r_out } })
    }

    pub fn shifted_box(lower: Vec<f64>, edges: Vec<f64>) -> Result<Self> {
        let dim = lower.len();
        check_dim(dim)?;
        if edges.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: edges.len() });
        }
        if !(lower[0] > 0.0) {
            return Err(Error::InvalidRegion(format!(
                "box must sit strictly inside x1 > 0; lower[0] = {}",
                lower[0]
            )));
        }
        if lower.iter().any(|l| !l.is_finite()) || edges.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidRegion("box corners must be finite with positive edges".into()));
        }
        Ok(Region { dim, shape: Shape::ShiftedBox { lower, edges } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volume(&self) -> f64 {
        let n = self.dim;
        match &self.shape {
            Shape::HalfBall { radius } => 0.5 * unit_ball_volume(n) * radius.powi(n as i32),
            Shape::HalfShell { r_in, r_out } => {
                0.5 * unit_ball_volume(n) * (r_out.powi(n as i32) - r_in.powi(n as i32))
            }
            Shape::ShiftedBox { edges, .. } => edges.iter().product(),
        }
    }

    /// Strict membership. The boundary is excluded.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::HalfBall { radius } => {
                x[0] > 0.0 && norm_sq(x) < radius * radius
            }
            Shape::HalfShell { r_in, r_out } => {
                let n2 = norm_sq(x);
                x[0] > 0.0 && n2 > r_in * r_in && n2 < r_out * r_out
            }
            Shape::ShiftedBox { lower, edges } => x
                .iter()
                .zip(lower.iter().zip(edges.iter()))
                .all(|(&xi, (&li, &ei))| xi > li && xi < li + ei),
        }
    }

    /// Radius of the smallest origin-centered ball containing the closure.
    pub fn circumradius(&self) -> f64 {
        match &self.shape {
            Shape::HalfBall { radius } => *radius,
            Shape::HalfShell { r_out, .. } => *r_out,
            Shape::ShiftedBox { lower, edges } => lower
                .iter()
                .zip(edges.iter())
                .map(|(&l, &e)| l.abs().max((l + e).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Axis-aligned bounding box of the closure, as (lower, upper) corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::HalfBall { radius } => {
                let r = *radius;
                let mut lo = vec![-r; self.dim];
                lo[0] = 0.0;
                (lo, vec![r; self.dim])
            }
            Shape::HalfShell { r_out, .. } => {
                let r = *r_out;
                let mut lo = vec![-r; self.dim];
                lo[0] = 0.0;
                (lo, vec![r; self.dim])
            }
            Shape::ShiftedBox { lower, edges } => {
                let hi = lower.iter().zip(edges.iter()).map(|(l, e)| l + e).collect();
                (lower.clone(), hi)
            }
        }
    }

    /// Index of the equal-volume cell containing `x`, for a partition of the
    /// region into `cells` pieces. Balls and shells split radially at radii
    /// interpolated in r^n (each shell then has the same volume); boxes split
    /// along the first coordinate. Points outside the region still map to a
    /// cell index; callers are expected to pass members.
    pub fn equal_volume_cell(&self, x: &[f64], cells: usize) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if cells == 0 {
            return Err(Error::InvalidParameter("partition needs at least one cell".into()));
        }
        let n = self.dim as f64;
        let t = match &self.shape {
            Shape::HalfBall { radius } => (norm_sq(x).sqrt() / radius).powf(n),
            Shape::HalfShell { r_in, r_out } => {
                let pn = norm_sq(x).sqrt().powf(n);
                (pn - r_in.powf(n)) / (r_out.powf(n) - r_in.powf(n))
            }
            Shape::ShiftedBox { lower, edges } => (x[0] - lower[0]) / edges[0],
        };
        let idx = (t * cells as f64).floor();
        Ok((idx.max(0.0) as usize).min(cells - 1))
    }

    /// Uniform sample by rejection from the bounding box. The acceptance rate
    /// is volume / box volume: 1 for boxes, and for half-balls the ratio of
    /// the unit-ball volume to 2^n, which decays geometrically in n but stays
    /// above 1/400 for n <= 10; thin shells pay a further r_out^n - r_in^n
    /// factor. These regions are used for n up to about 10, where the loop
    /// terminates in a handful of iterations.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (lo, hi) = self.bounding_box();
        let mut x = vec![0.0; self.dim];
        loop {
            for i in 0..self.dim {
                x[i] = rng.random_range(lo[i]..hi[i]);
            }
            if self.contains_unchecked(&x) {
                return x;
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidRegion("dimension must be at least 1".into()));
    }
    Ok(())
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Serializable description of a region, used by plan files and the CLI.
/// For a half-ball exactly one of `radius` and `target_volume` must be set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    HalfBall {
        #[serde(skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        target_volume: Option<f64>,
    },
    HalfShell { r_in: f64, r_out: f64 },
    ShiftedBox { lower: Vec<f64>, edges: Vec<f64> },
}

impl RegionSpec {
    pub fn build(&self, dim: usize) -> Result<Region> {
        match self {
            RegionSpec::HalfBall { radius: Some(r), target_volume: None } => {
                Region::half_ball(dim, *r)
            }
            RegionSpec::HalfBall { radius: None, target_volume: Some(v) } => {
                Region::half_ball_with_volume(dim, *v)
            }
            RegionSpec::HalfBall { .. } => Err(Error::Config(
                "half_ball takes exactly one of `radius` or `target_volume`".into(),
            )),
            RegionSpec::HalfShell { r_in, r_out } => Region::half_shell(dim, *r_in, *r_out),
            RegionSpec::ShiftedBox { lower, edges } => {
                if lower.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: lower.len() });
                }
                Region::shifted_box(lower.clone(), edges.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream_rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_ball_volume_closed_forms() {
        // n=2: pi r^2 / 2; n=3: 2 pi r^3 / 3.
        let r2 = Region::half_ball(2, 1.5).unwrap();
        assert!((r2.volume() - std::f64::consts::PI * 2.25 / 2.0).abs() < 1e-12);
        let r3 = Region::half_ball(3, 1.0).unwrap();
        assert!((r3.volume() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn half_ball_with_volume_round_trips() {
        for n in 1..=10 {
            for &v in &[0.01, 0.25, 0.5, 1.0, 3.0] {
                let region = Region::half_ball_with_volume(n, v).unwrap();
                let rel = (region.volume() - v).abs() / v;
                assert!(rel < 1e-12, "n={n} v={v}: rel err {rel:e}");
            }
        }
        // Frozen value: n=2, volume 1/2 gives radius 1/sqrt(pi).
        let region = Region::half_ball_with_volume(2, 0.5).unwrap();
        let expect = 0.564_189_583_547_756_3_f64;
        assert!((region.circumradius() - expect).abs() < 1e-14);
    }

    #[test]
    fn shell_and_box_volumes() {
        let shell = Region::half_shell(2, 0.5, 1.5).unwrap();
        assert!((shell.volume() - std::f64::consts::PI * (2.25 - 0.25) / 2.0).abs() < 1e-12);
        let bx = Region::shifted_box(vec![0.25, -1.0], vec![2.0, 3.0]).unwrap();
        assert!((bx.volume() - 6.0).abs() < 1e-12);
        assert!((bx.circumradius() - (2.25f64 * 2.25 + 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn membership_is_strict_and_asymmetric() {
        let ball = Region::half_ball(3, 1.0).unwrap();
        assert!(ball.contains(&[0.5, 0.1, -0.2]).unwrap());
        assert!(!ball.contains(&[0.0, 0.5, 0.0]).unwrap(), "wall is excluded");
        assert!(!ball.contains(&[1.0, 0.0, 0.0]).unwrap(), "sphere is excluded");
        assert!(!ball.contains(&[-0.5, 0.1, -0.2]).unwrap());

        let shell = Region::half_shell(2, 0.5, 1.0).unwrap();
        assert!(!shell.contains(&[0.5, 0.0]).unwrap(), "inner sphere excluded");
        assert!(shell.contains(&[0.7, 0.0]).unwrap());

        let bx = Region::shifted_box(vec![1.0], vec![1.0]).unwrap();
        assert!(!bx.contains(&[1.0]).unwrap());
        assert!(bx.contains(&[1.5]).unwrap());
        assert!(!bx.contains(&[2.0]).unwrap());
    }

    #[test]
    fn membership_checks_dimension() {
        let ball = Region::half_ball(3, 1.0).unwrap();
        assert!(matches!(
            ball.contains(&[0.1, 0.2]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn constructor_validation() {
        assert!(Region::half_ball(0, 1.0).is_err());
        assert!(Region::half_ball(2, 0.0).is_err());
        assert!(Region::half_ball(2, f64::INFINITY).is_err());
        assert!(Region::half_shell(2, 1.0, 1.0).is_err());
        assert!(Region::half_shell(2, -0.5, 1.0).is_err());
        assert!(Region::shifted_box(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Region::shifted_box(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(Region::shifted_box(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn samples_lie_in_region_and_never_in_its_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for region in [
            Region::half_ball(4, 1.3).unwrap(),
            Region::half_shell(3, 0.4, 1.1).unwrap(),
            Region::shifted_box(vec![0.5, -1.0, 2.0], vec![1.0, 2.0, 0.5]).unwrap(),
        ] {
            for _ in 0..2000 {
                let x = region.sample_uniform(&mut rng);
                assert!(region.contains(&x).unwrap());
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                assert!(!region.contains(&neg).unwrap(), "region must be asymmetric");
                assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() <= region.circumradius() + 1e-12);
            }
        }
    }

    #[test]
    fn sampler_first_coordinate_matches_quadrature_mean() {
        // For the uniform law on the half-ball, E[x1] has the closed form
        // 2 V_{n-1}(1) r / ((n+1) V_n(1)). Check that against independent
        // Simpson quadrature of the cross-section integral, then check the
        // sampler against the quadrature value within 4 standard errors.
        let n = 3;
        let r = 1.25_f64;
        let m = 20_000usize;
        let integrand = |x: f64| x * (r * r - x * x).powf((n as f64 - 1.0) / 2.0);
        let steps = 10_000;
        let h = r / steps as f64;
        let mut quad = integrand(0.0) + integrand(r);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            quad += w * integrand(i as f64 * h);
        }
        quad *= h / 3.0;
        let region = Region::half_ball(n, r).unwrap();
        let mean_quad = unit_ball_volume(n - 1) * quad / region.volume();

        let closed = 2.0 * unit_ball_volume(n - 1) * r / ((n as f64 + 1.0) * unit_ball_volume(n));
        assert!((mean_quad - closed).abs() < 1e-6, "quadrature {mean_quad} vs closed {closed}");

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..m).map(|_| region.sample_uniform(&mut rng)[0]).collect();
        let (mean, se) = crate::stats::mean_and_stderr(&xs);
        assert!(
            (mean - mean_quad).abs() < 4.0 * se,
            "sampler mean {mean} vs quadrature {mean_quad} (se {se})"
        );
    }

    #[test]
    fn rejection_acceptance_matches_volume_ratio() {
        // Acceptance = region volume / bounding box volume; for the n=5
        // half-ball that is V_5(1)/2^5.
        let n = 5;
        let region = Region::half_ball(n, 0.9).unwrap();
        let (lo, hi) = region.bounding_box();
        let box_vol: f64 = lo.iter().zip(hi.iter()).map(|(l, h)| h - l).product();
        let expect = region.volume() / box_vol;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 40_000;
        let mut hits = 0u32;
        let mut x = vec![0.0; n];
        for _ in 0..trials {
            for i in 0..n {
                x[i] = rng.random_range(lo[i]..hi[i]);
            }
            if region.contains(&x).unwrap() {
                hits += 1;
            }
        }
        let p = hits as f64 / trials as f64;
        let se = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((p - expect).abs() < 4.0 * se, "acceptance {p} vs {expect} (se {se})");
    }

    #[test]
    fn region_spec_builds_and_validates() {
        let spec = RegionSpec::HalfBall { radius: None, target_volume: Some(0.5) };
        let region = spec.build(4).unwrap();
        assert!((region.volume() - 0.5).abs() < 1e-12);
        let bad = RegionSpec::HalfBall { radius: Some(1.0), target_volume: Some(0.5) };
        assert!(bad.build(4).is_err());
        let bx = RegionSpec::ShiftedBox { lower: vec![1.0, 0.0], edges: vec![1.0, 1.0] };
        assert!(bx.build(3).is_err(), "dimension mismatch");
    }

    #[test]
    fn equal_volume_cells_receive_equal_mass() {
        let regions = [
            Region::half_ball(3, 1.1).unwrap(),
            Region::half_shell(3, 0.4, 1.2).unwrap(),
            Region::shifted_box(vec![0.5, -1.0, 0.0], vec![2.0, 1.0, 3.0]).unwrap(),
        ];
        for (ri, region) in regions.iter().enumerate() {
            let cells = 4;
            let mut rng = stream_rng(11, "test.cells", ri as u64);
            let trials = 20_000usize;
            let mut counts = vec![0u32; cells];
            for _ in 0..trials {
                let x = region.sample_uniform(&mut rng);
                counts[region.equal_volume_cell(&x, cells).unwrap()] += 1;
            }
            let expect = trials as f64 / cells as f64;
            let se = (expect * (1.0 - 1.0 / cells as f64)).sqrt();
            for (c, &got) in counts.iter().enumerate() {
                assert!(
                    (got as f64 - expect).abs() < 4.0 * se,
                    "region {ri} cell {c}: {got} vs {expect}"
                );
            }
        }
        let r = Region::half_ball(2, 1.0).unwrap();
        assert!(r.equal_volume_cell(&[0.5, 0.0], 0).is_err());
        assert!(r.equal_volume_cell(&[0.5], 2).is_err());
    }
}
