//! Lattice basis reduction with exact change-of-basis tracking.
//!
//! Column LLL with the Lovasz parameter fixed at 0.99 plus full size
//! reduction. The reduction runs in f64 but records the accumulated
//! unimodular column transform exactly in i128, so integer coefficient
//! vectors can be mapped between the original and the reduced basis without
//! rounding. Reduction here is a conditioning aid for enumeration and for
//! the sampling walk; enumeration correctness never depends on how reduced
//! the basis actually is, so the main loop carries an iteration cap and a
//! cap-break leaves a perfectly valid (just less orthogonal) basis.

use nalgebra::{DMatrix, DVector};

pub const LLL_DELTA: f64 = 0.99;

/// Gram-Schmidt data for the columns of `b`: orthogonalized vectors, the
/// projection coefficients mu[i][j] (j < i), and squared norms of b*_i.
fn gram_schmidt(b: &DMatrix<f64>) -> (Vec<DVector<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = b.ncols();
    let mut b_star: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms2 = vec![0.0; n];
    for i in 0..n {
        let mut v = b.column(i).clone_owned();
        for j in 0..i {
            let m = if norms2[j] > 0.0 { b.column(i).dot(&b_star[j]) / norms2[j] } else { 0.0 };
            mu[i][j] = m;
            v.axpy(-m, &b_star[j], 1.0);
        }
        norms2[i] = v.dot(&v);
        b_star.push(v);
    }
    (b_star, mu, norms2)
}

/// Reduce the columns of `basis`; returns the reduced basis and the integer
/// column transform U with reduced = basis * U (det U = +-1).
pub fn lll_reduce_with_transform(basis: &DMatrix<f64>) -> (DMatrix<f64>, Vec<Vec<i128>>) {
    let n = basis.ncols();
    let mut b = basis.clone();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|c| (0..n).map(|r| i128::from(r == c)).collect())
        .collect();
    if n < 2 {
        return (b, u);
    }
    let (mut b_star, mut mu, mut norms2) = gram_schmidt(&b);
    let mut k = 1usize;
    let mut iterations = 0usize;
    let cap = 10_000 * n * n;
    while k < n {
        iterations += 1;
        if iterations > cap {
            break;
        }
        // Size-reduce column k. Columns before k are untouched, so their
        // Gram-Schmidt data stays valid; only row k of mu needs refreshing.
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i128;
                let col_j = b.column(j).clone_owned();
                let mut col_k = b.column_mut(k);
                col_k.axpy(-q, &col_j, 1.0);
                for r in 0..n {
                    u[k][r] -= qi * u[j][r];
                }
                for jj in 0..k {
                    let m = if norms2[jj] > 0.0 {
                        b.column(k).dot(&b_star[jj]) / norms2[jj]
                    } else {
                        0.0
                    };
                    mu[k][jj] = m;
                }
            }
        }
        let lhs = norms2[k];
        let rhs = (LLL_DELTA - mu[k][k - 1] * mu[k][k - 1]) * norms2[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap_columns(k, k - 1);
            u.swap(k, k - 1);
            let gs = gram_schmidt(&b);
            b_star = gs.0;
            mu = gs.1;
            norms2 = gs.2;
            k = k.max(2) - 1;
        }
    }
    (b, u)
}

/// Plain reduction when the transform is not needed.
pub fn lll_reduce(basis: &DMatrix<f64>) -> DMatrix<f64> {
    lll_reduce_with_transform(basis).0
}

/// Determinant of a small integer matrix (columns), by fraction-free
/// elimination; used to assert unimodularity of transforms in tests.
pub fn det_i128(cols: &[Vec<i128>]) -> i128 {
    let n = cols.len();
    let mut m: Vec<Vec<i128>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
    let mut prev = 1i128;
    let mut sign = 1i128;
    for step in 0..n {
        let Some(p) = (step..n).find(|&i| m[i][step] != 0) else {
            return 0;
        };
        if p != step {
            m.swap(p, step);
            sign = -sign;
        }
        for i in step + 1..n {
            for j in step + 1..n {
                m[i][j] = (m[step][step] * m[i][j] - m[i][step] * m[step][j]) / prev;
            }
            m[i][step] = 0;
        }
        prev = m[step][step];
    }
    sign * prev
}
