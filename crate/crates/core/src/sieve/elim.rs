//! Exact rank computations over the integers.
//!
//! Subset enumeration needs ranks of many overlapping families, so alongside
//! a one-shot Bareiss rank there is an incremental echelon form supporting
//! push/pop in LIFO order. All arithmetic is over BigInt: a rank here is a
//! statement about integer vectors, never about floating-point tolerance.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Rank of a finite list of integer vectors (rows), by fraction-free
/// Bareiss elimination with row and column pivoting. Exact for any input;
/// intermediate entries are minors of the original matrix.
pub fn exact_rank(vectors: &[Vec<BigInt>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors.len();
    let cols = vectors[0].len();
    debug_assert!(vectors.iter().all(|v| v.len() == cols));
    let mut m: Vec<Vec<BigInt>> = vectors.to_vec();
    let mut prev = BigInt::from(1);
    let mut row = 0;
    let mut col = 0;
    while row < rows && col < cols {
        match (row..rows).find(|&i| !m[i][col].is_zero()) {
            None => col += 1,
            Some(p) => {
                m.swap(row, p);
                for i in row + 1..rows {
                    for j in col + 1..cols {
                        let t = &m[row][col] * &m[i][j] - &m[i][col] * &m[row][j];
                        m[i][j] = t / &prev;
                    }
                    m[i][col] = BigInt::zero();
                }
                prev = m[row][col].clone();
                row += 1;
                col += 1;
            }
        }
    }
    row
}

/// Incremental row-echelon basis over the rationals, kept in integer form.
///
/// Rows are stored in insertion order; each stored row was reduced against
/// all rows before it, so a single forward pass reduces any new vector.
/// `pop` undoes the most recent `push` (strict LIFO), which is exactly the
/// discipline of a depth-first subset walk.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    dim: usize,
    rows: Vec<(usize, Vec<BigInt>)>,
    history: Vec<bool>,
}

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        EchelonBasis { dim, rows: Vec::new(), history: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the stored rows. Returns None when v is in their
    /// span, otherwise the content-reduced, sign-normalized remainder and
    /// its pivot column.
    fn reduce(&self, v: &[BigInt]) -> Option<(usize, Vec<BigInt>)> {
        debug_assert_eq!(v.len(), self.dim);
        let mut w: Vec<BigInt> = v.to_vec();
        for (p, row) in &self.rows {
            if !w[*p].is_zero() {
                let a = row[*p].clone();
                let b = w[*p].clone();
                for j in 0..self.dim {
                    w[j] = &a * &w[j] - &b * &row[j];
                }
                content_reduce(&mut w);
            }
        }
        let pivot = w.iter().position(|x| !x.is_zero())?;
        if w[pivot].is_negative() {
            for x in w.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        Some((pivot, w))
    }

    pub fn in_span(&self, v: &[BigInt]) -> bool {
        self.reduce(v).is_none()
    }

    /// Add a vector. Returns true when the rank grew.
    pub fn push(&mut self, v: &[BigInt]) -> bool {
        match self.reduce(v) {
            Some(row) => {
                self.rows.push(row);
                self.history.push(true);
                true
            }
            None => {
                self.history.push(false);
                false
            }
        }
    }

    /// Undo the most recent push.
    pub fn pop(&mut self) {
        match self.history.pop() {
            Some(true) => {
                self.rows.pop();
            }
            Some(false) => {}
            None => panic!("pop without matching push"),
        }
    }
}

/// Divide out the gcd of the entries; keeps coefficient growth in check.
fn content_reduce(w: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in w.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
        }
    }
    if g > BigInt::from(1) {
        for x in w.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// Floating-point rank with partial pivoting, used only as a cross-check
/// against the exact rank of well-scaled inputs.
pub fn approx_rank(vectors: &[Vec<f64>], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors.len();
    let cols = vectors[0].len();
    let mut m: Vec<Vec<f64>> = vectors.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale * (rows.max(cols) as f64);
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let (p, best) = (rank..rows)
            .map(|i| (i, m[i][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best <= tol {
            col += 1;
            continue;
        }
        m.swap(rank, p);
        for i in rank + 1..rows {
            let f = m[i][col] / m[rank][col];
            for j in col..cols {
                m[i][j] -= f * m[rank][j];
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}
