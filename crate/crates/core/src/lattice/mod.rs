//! Covolume-one lattices in R^n: construction, reduction, enumeration, and
//! Haar sampling.
//!
//! A lattice is held as a square f64 basis matrix whose columns generate it,
//! normalized to determinant 1 within 1e-9. Integer data (the coefficient
//! vector of a lattice point in the stored basis) is kept exact: geometry is
//! floating point, combinatorics is not.

pub mod enumerate;
pub mod haar;
pub mod lll;

use nalgebra::DMatrix;
use num_bigint::BigInt;

pub use haar::{haar_sample, haar_sample_exact_2d, ChainParams, LatticeChain};

use crate::error::Error;
use crate::Result;

/// Determinant tolerance for a valid basis.
pub const DET_TOL: f64 = 1e-9;
/// Fail-fast drift bound checked before each renormalization of the
/// sampling walk.
pub const DET_DRIFT_LIMIT: f64 = 1e-6;

/// How a lattice was produced; carried along for report metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerId {
    /// Random walk on the space of covolume-one lattices.
    McmcWalk,
    /// Exact two-dimensional rejection sampler.
    ExactDim2,
    /// Explicitly supplied basis.
    Explicit,
}

#[derive(Clone, Copy, Debug)]
pub struct Provenance {
    pub sampler: SamplerId,
    pub chain_seed: u64,
    pub burnin: u64,
    pub thin: u64,
}

impl Provenance {
    pub fn explicit() -> Self {
        Provenance { sampler: SamplerId::Explicit, chain_seed: 0, burnin: 0, thin: 0 }
    }
}

/// A lattice point: floating-point coordinates plus the exact integer
/// coefficients expressing it in the lattice's stored basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub coords: Vec<f64>,
    pub coeffs: Vec<BigInt>,
}

impl LatticePoint {
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// A covolume-one lattice, basis columns in a square matrix with
/// determinant 1 (after an orientation fix; negating one basis vector does
/// not change the lattice).
#[derive(Clone, Debug)]
pub struct UnimodularLattice {
    basis: DMatrix<f64>,
    provenance: Provenance,
}

impl UnimodularLattice {
    /// Wrap a basis that is already unimodular to within `DET_TOL`.
    pub fn from_basis(basis: DMatrix<f64>) -> Result<Self> {
        Self::from_basis_with_provenance(basis, Provenance::explicit())
    }

    pub(crate) fn from_basis_with_provenance(
        mut basis: DMatrix<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if basis.nrows() != basis.ncols() || basis.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "basis must be square and nonempty, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let mut det = basis.determinant();
        if det < 0.0 {
            basis.column_mut(0).neg_mut();
            det = -det;
        }
        if !((det - 1.0).abs() <= DET_TOL) {
            return Err(Error::DeterminantDrift { det });
        }
        Ok(UnimodularLattice { basis, provenance })
    }

    /// Wrap an arbitrary nonsingular basis, rescaling it to determinant 1.
    pub fn from_basis_renormalized(mut basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() || basis.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "basis must be square and nonempty, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let det = basis.determinant();
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::InvalidParameter(format!("basis is singular (det {det:e})")));
        }
        if det < 0.0 {
            basis.column_mut(0).neg_mut();
        }
        let scale = det.abs().powf(-1.0 / basis.nrows() as f64);
        basis *= scale;
        Self::from_basis(basis)
    }

    /// The integer lattice Z^n.
    pub fn integer_lattice(n: usize) -> Self {
        UnimodularLattice {
            basis: DMatrix::identity(n, n),
            provenance: Provenance::explicit(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn det(&self) -> f64 {
        self.basis.determinant()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Same lattice, LLL-reduced basis.
    pub fn lll_reduced(&self) -> Self {
        UnimodularLattice {
            basis: lll::lll_reduce(&self.basis),
            provenance: self.provenance,
        }
    }

    /// All nonzero lattice points with |x| <= radius (up to a 1e-9 relative
    /// boundary tolerance), sorted by coefficient vector. Errors when the
    /// expected or actual point count exceeds `cap`.
    pub fn enumerate_in_ball(&self, radius: f64, cap: usize) -> Result<Vec<LatticePoint>> {
        enumerate::enumerate_in_ball(self, radius, cap)
    }
}
