//! Point configurations: the common currency of both samplers.
//!
//! A configuration is a finite set of distinct points of one dimension,
//! tagged with its origin. Lattice-born configurations also carry the exact
//! integer coefficient vector of each point, which is what the sieve
//! machinery consumes: linear dependence among lattice points is decided on
//! coefficients, never on floating-point coordinates.

use num_bigint::BigInt;

use crate::error::Error;
use crate::lattice::{LatticePoint, UnimodularLattice};
use crate::region::Region;
use crate::sieve::VectorFamily;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigSource {
    Lattice,
    Poisson,
    Synthetic,
}

#[derive(Clone, Debug)]
pub struct PointConfig {
    dim: usize,
    points: Vec<Vec<f64>>,
    coeffs: Option<Vec<Vec<BigInt>>>,
    source: ConfigSource,
}

impl PointConfig {
    pub fn new(
        dim: usize,
        points: Vec<Vec<f64>>,
        coeffs: Option<Vec<Vec<BigInt>>>,
        source: ConfigSource,
    ) -> Result<Self> {
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
        }
        if let Some(cs) = &coeffs {
            if cs.len() != points.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} coefficient vectors for {} points",
                    cs.len(),
                    points.len()
                )));
            }
            for c in cs {
                if c.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
                }
            }
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::InvalidParameter("configuration points must be distinct".into()));
            }
        }
        Ok(PointConfig { dim, points, coeffs, source })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn coeffs(&self) -> Option<&[Vec<BigInt>]> {
        self.coeffs.as_deref()
    }

    pub fn source(&self) -> ConfigSource {
        self.source
    }

    /// The coefficient vectors as a family for exact rank work.
    /// Errors when the configuration has no coefficients (Poisson side)
    /// or exceeds the family cap.
    pub fn coeff_family(&self) -> Result<VectorFamily> {
        let coeffs = self.coeffs.as_ref().ok_or_else(|| {
            Error::InvalidParameter("configuration carries no integer coefficients".into())
        })?;
        VectorFamily::new(self.dim, coeffs.clone())
    }
}

/// Keep the enumerated points lying in `region`. The enumeration radius
/// must cover the region, otherwise membership would be silently truncated.
pub fn restrict_to_region(
    points: &[LatticePoint],
    enum_radius: f64,
    region: &Region,
) -> Result<PointConfig> {
    let circum = region.circumradius();
    if circum > enum_radius * (1.0 + 1e-12) {
        return Err(Error::RegionNotEnclosed { circumradius: circum, radius: enum_radius });
    }
    let mut kept_points = Vec::new();
    let mut kept_coeffs = Vec::new();
    for p in points {
        if p.coords.len() != region.dim() {
            return Err(Error::DimensionMismatch { expected: region.dim(), got: p.coords.len() });
        }
        if region.contains_unchecked(&p.coords) {
            kept_points.push(p.coords.clone());
            kept_coeffs.push(p.coeffs.clone());
        }
    }
    PointConfig::new(region.dim(), kept_points, Some(kept_coeffs), ConfigSource::Lattice)
}

/// Enumerate a lattice out to the region's circumradius and restrict.
pub fn lattice_restriction(
    lattice: &UnimodularLattice,
    region: &Region,
    cap: usize,
) -> Result<PointConfig> {
    if lattice.dim() != region.dim() {
        return Err(Error::DimensionMismatch { expected: region.dim(), got: lattice.dim() });
    }
    let radius = region.circumradius();
    let pts = lattice.enumerate_in_ball(radius, cap)?;
    restrict_to_region(&pts, radius, region)
}
