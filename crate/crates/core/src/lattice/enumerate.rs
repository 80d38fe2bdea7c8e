//! Enumeration of all lattice points inside a ball.
//!
//! Depth-first search over coefficient vectors with per-level interval
//! bounds from the Gram-Schmidt decomposition of an LLL-reduced basis.
//! Writing a candidate point as sum of c_i b_i, its squared norm decomposes
//! level by level as sum over i of (c_i + y_i)^2 |b*_i|^2 where y_i collects
//! the contribution of the already-fixed deeper coefficients, so each level
//! restricts c_i to an explicit integer interval and partial sums prune the
//! search exactly.
//!
//! Coefficients are tracked through the reduction transform, so the
//! returned coefficient vectors are exact integers in the lattice's
//! original stored basis.

use nalgebra::DVector;
use num_bigint::BigInt;

use crate::error::Error;
use crate::lattice::lll::lll_reduce_with_transform;
use crate::lattice::{LatticePoint, UnimodularLattice};
use crate::region::unit_ball_ln_volume;
use crate::Result;

/// Relative slack applied at the ball boundary so floating-point rounding
/// cannot drop a point lying exactly on it.
const BOUNDARY_TOL: f64 = 1e-9;

pub fn enumerate_in_ball(
    lattice: &UnimodularLattice,
    radius: f64,
    cap: usize,
) -> Result<Vec<LatticePoint>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "enumeration radius must be positive and finite, got {radius}"
        )));
    }
    let n = lattice.dim();
    // Covolume is 1, so the ball volume predicts the point count.
    let expected = (unit_ball_ln_volume(n) + n as f64 * radius.ln()).exp();
    if expected > cap as f64 {
        return Err(Error::EnumerationCap { expected, cap });
    }

    let (reduced, transform) = lll_reduce_with_transform(lattice.basis());
    // Gram-Schmidt of the reduced basis.
    let mut b_star: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms2 = vec![0.0; n];
    for i in 0..n {
        let mut v = reduced.column(i).clone_owned();
        for j in 0..i {
            let m = reduced.column(i).dot(&b_star[j]) / norms2[j];
            mu[i][j] = m;
            v.axpy(-m, &b_star[j], 1.0);
        }
        norms2[i] = v.dot(&v);
        if !(norms2[i] > 0.0) {
            return Err(Error::InvalidParameter("basis is numerically singular".into()));
        }
        b_star.push(v);
    }

    let r2 = radius * radius * (1.0 + BOUNDARY_TOL);
    let mut coeffs = vec![0i64; n];
    // y[i] = sum over j > i of mu[j][i] c_j, maintained incrementally.
    let mut y = vec![0.0; n];
    let mut out: Vec<LatticePoint> = Vec::new();
    descend(
        &DescendCtx { n, mu: &mu, norms2: &norms2, r2, cap, radius },
        &reduced,
        &transform,
        n,
        0.0,
        &mut coeffs,
        &mut y,
        &mut out,
    )?;

    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    Ok(out)
}

struct DescendCtx<'a> {
    n: usize,
    mu: &'a [Vec<f64>],
    norms2: &'a [f64],
    r2: f64,
    cap: usize,
    radius: f64,
}

#[allow(clippy::too_many_arguments)]
fn descend(
    ctx: &DescendCtx,
    reduced: &nalgebra::DMatrix<f64>,
    transform: &[Vec<i128>],
    level: usize,
    partial: f64,
    coeffs: &mut [i64],
    y: &mut [f64],
    out: &mut Vec<LatticePoint>,
) -> Result<()> {
    if level == 0 {
        emit(ctx, reduced, transform, coeffs, out)?;
        return Ok(());
    }
    let i = level - 1;
    let span2 = ctx.r2 - partial;
    if span2 < 0.0 {
        return Ok(());
    }
    let s = (span2 / ctx.norms2[i]).sqrt();
    let lo = (-y[i] - s - 1e-12).ceil() as i64;
    let hi = (-y[i] + s + 1e-12).floor() as i64;
    for c in lo..=hi {
        let t = c as f64 + y[i];
        let next_partial = partial + t * t * ctx.norms2[i];
        if next_partial > ctx.r2 {
            continue;
        }
        coeffs[i] = c;
        // Fixing c_i contributes mu[i][j] c_i to y_j for every j < i.
        for j in 0..i {
            y[j] += ctx.mu[i][j] * c as f64;
        }
        descend(ctx, reduced, transform, level - 1, next_partial, coeffs, y, out)?;
        for j in 0..i {
            y[j] -= ctx.mu[i][j] * c as f64;
        }
    }
    coeffs[i] = 0;
    Ok(())
}

fn emit(
    ctx: &DescendCtx,
    reduced: &nalgebra::DMatrix<f64>,
    transform: &[Vec<i128>],
    coeffs: &[i64],
    out: &mut Vec<LatticePoint>,
) -> Result<()> {
    if coeffs.iter().all(|&c| c == 0) {
        return Ok(());
    }
    let n = ctx.n;
    // Coordinates from the reduced basis (identical to the original basis
    // applied to the mapped coefficients, up to rounding).
    let mut coords = DVector::zeros(n);
    for (j, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            coords.axpy(c as f64, &reduced.column(j).clone_owned(), 1.0);
        }
    }
    let norm2 = coords.dot(&coords);
    if norm2 > ctx.radius * ctx.radius * (1.0 + BOUNDARY_TOL) {
        return Ok(());
    }
    // Map through the reduction transform: original = sum c_j U_col_j.
    let mut original = vec![0i128; n];
    for (j, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            for r in 0..n {
                original[r] += c as i128 * transform[j][r];
            }
        }
    }
    out.push(LatticePoint {
        coords: coords.iter().copied().collect(),
        coeffs: original.into_iter().map(BigInt::from).collect(),
    });
    if out.len() > ctx.cap {
        return Err(Error::EnumerationCap { expected: out.len() as f64, cap: ctx.cap });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CAP: usize = 100_000;

    #[test]
    fn integer_lattice_counts_by_radius() {
        let z2 = UnimodularLattice::integer_lattice(2);
        assert_eq!(z2.enumerate_in_ball(0.9, CAP).unwrap().len(), 0);
        assert_eq!(z2.enumerate_in_ball(1.2, CAP).unwrap().len(), 4);
        assert_eq!(z2.enumerate_in_ball(1.5, CAP).unwrap().len(), 8);
        // Norms 1, sqrt(2), 2 contribute 4 points each.
        assert_eq!(z2.enumerate_in_ball(2.0, CAP).unwrap().len(), 12);
        let z3 = UnimodularLattice::integer_lattice(3);
        assert_eq!(z3.enumerate_in_ball(1.0, CAP).unwrap().len(), 6);
        assert_eq!(z3.enumerate_in_ball(1.5, CAP).unwrap().len(), 18);
    }

    #[test]
    fn points_on_the_boundary_are_included() {
        let z2 = UnimodularLattice::integer_lattice(2);
        let pts = z2.enumerate_in_ball(1.0, CAP).unwrap();
        assert_eq!(pts.len(), 4, "radius exactly 1 keeps the unit vectors");
    }

    #[test]
    fn coefficients_reproduce_coordinates_in_any_basis() {
        // A badly skewed basis of Z^2: columns (1,0) and (60,1).
        let basis = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 60.0, 1.0]);
        let lat = UnimodularLattice::from_basis(basis.clone()).unwrap();
        let pts = lat.enumerate_in_ball(2.0, CAP).unwrap();
        assert_eq!(pts.len(), 12, "same lattice as Z^2");
        for p in &pts {
            let mut rebuilt = DVector::zeros(2);
            for (j, c) in p.coeffs.iter().enumerate() {
                let cf: f64 = c.to_string().parse().unwrap();
                rebuilt.axpy(cf, &basis.column(j).clone_owned(), 1.0);
            }
            for (a, b) in rebuilt.iter().zip(p.coords.iter()) {
                assert!((a - b).abs() < 1e-9, "basis * coeffs must equal coords");
            }
        }
        // The skew forces genuinely large coefficients in the stored basis.
        assert!(pts
            .iter()
            .any(|p| p.coeffs.iter().any(|c| c.to_string().parse::<i64>().unwrap().abs() > 10)));
    }

    #[test]
    fn hexagonal_lattice_has_six_minimal_vectors() {
        // Columns (a, 0), (a/2, a sqrt(3)/2) with a chosen for covolume 1.
        let a = (2.0 / 3.0f64.sqrt()).sqrt();
        let basis = DMatrix::from_column_slice(2, 2, &[a, 0.0, a / 2.0, a * 3.0f64.sqrt() / 2.0]);
        let lat = UnimodularLattice::from_basis(basis).unwrap();
        let pts = lat.enumerate_in_ball(a * 1.001, CAP).unwrap();
        assert_eq!(pts.len(), 6);
        for p in &pts {
            assert!((p.norm() - a).abs() < 1e-9);
        }
    }

    #[test]
    fn output_is_sorted_and_deterministic() {
        let z3 = UnimodularLattice::integer_lattice(3);
        let a = z3.enumerate_in_ball(2.5, CAP).unwrap();
        let b = z3.enumerate_in_ball(2.5, CAP).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!(w[0].coeffs < w[1].coeffs, "sorted by coefficient vector");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let z2 = UnimodularLattice::integer_lattice(2);
        assert!(matches!(
            z2.enumerate_in_ball(50.0, 100),
            Err(Error::EnumerationCap { .. })
        ));
    }

    /// Brute-force reference: try every coefficient vector in a box wide
    /// enough to cover the ball (bound via rows of the basis inverse).
    fn brute_force(lat: &UnimodularLattice, radius: f64) -> Vec<Vec<i64>> {
        let n = lat.dim();
        let inv = lat.basis().clone().try_inverse().expect("unimodular basis");
        let bounds: Vec<i64> = (0..n)
            .map(|i| {
                let row_norm: f64 = (0..n).map(|j| inv[(i, j)] * inv[(i, j)]).sum::<f64>().sqrt();
                (row_norm * radius).ceil() as i64 + 1
            })
            .collect();
        let mut out = Vec::new();
        // Start at the most negative corner so the odometer sweeps the
        // whole box before the last digit wraps.
        let mut c: Vec<i64> = bounds.iter().map(|&b| -b).collect();
        loop {
            if c.iter().any(|&x| x != 0) {
                let mut coords = DVector::zeros(n);
                for (j, &cj) in c.iter().enumerate() {
                    coords.axpy(cj as f64, &lat.basis().column(j).clone_owned(), 1.0);
                }
                if coords.dot(&coords) <= radius * radius * (1.0 + BOUNDARY_TOL) {
                    out.push(c.clone());
                }
            }
            // Odometer increment over the box.
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                c[i] += 1;
                if c[i] <= bounds[i] {
                    break;
                }
                c[i] = -bounds[i];
                i += 1;
            }
        }
    }

    #[test]
    fn matches_brute_force_on_random_unimodular_lattices() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for trial in 0..60 {
            let n = rng.random_range(2..=4);
            let mut basis = DMatrix::<f64>::identity(n, n);
            for _ in 0..10 {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n);
                while j == i {
                    j = rng.random_range(0..n);
                }
                let t = rng.random_range(-3i64..=3) as f64;
                let col_j = basis.column(j).clone_owned();
                basis.column_mut(i).axpy(t, &col_j, 1.0);
            }
            let lat = UnimodularLattice::from_basis(basis).unwrap();
            let radius = rng.random_range(0.5..1.5);
            let fast: Vec<Vec<i64>> = lat
                .enumerate_in_ball(radius, CAP)
                .unwrap()
                .iter()
                .map(|p| p.coeffs.iter().map(|c| c.to_string().parse().unwrap()).collect())
                .collect();
            let brute = brute_force(&lat, radius);
            assert_eq!(fast, brute, "trial {trial} n={n} radius={radius}");
        }
    }
}
