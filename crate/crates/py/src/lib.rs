//! Python bindings for the lattice/Poisson comparison library.
//!
//! The surface mirrors the Rust API where it is cheap to do so: regions,
//! the Haar chain, exact sieve counts over integer vector families, and the
//! plan runner. Everything crossing the boundary is plain Python data
//! (lists, ints, floats, JSON strings); coefficient vectors come back as
//! Python ints, so nothing overflows silently.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ranlat::lattice::{haar::ChainParams, haar::LatticeChain, UnimodularLattice};
use ranlat::plan::SuiteConfig;
use ranlat::region::Region;
use ranlat::seeding::stream_rng;
use ranlat::sieve::{check_truncation_bounds, mask_from_indices, Mask, VectorFamily};

fn to_py_err(e: ranlat::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Measurable window in R^n: half-ball, half-shell, or shifted box.
#[pyclass(frozen, name = "Region")]
struct PyRegion {
    inner: Region,
}

#[pymethods]
impl PyRegion {
    /// Half-ball of the given radius, or of the radius whose half-ball has
    /// `target_volume` when the volume is given instead.
    #[staticmethod]
    #[pyo3(signature = (dim, radius=None, target_volume=None))]
    fn half_ball(dim: usize, radius: Option<f64>, target_volume: Option<f64>) -> PyResult<Self> {
        let inner = match (radius, target_volume) {
            (Some(r), None) => Region::half_ball(dim, r),
            (None, Some(v)) => Region::half_ball_with_volume(dim, v),
            _ => {
                return Err(PyValueError::new_err(
                    "pass exactly one of radius or target_volume",
                ))
            }
        };
        Ok(Self { inner: inner.map_err(to_py_err)? })
    }

    #[staticmethod]
    fn half_shell(dim: usize, r_in: f64, r_out: f64) -> PyResult<Self> {
        Ok(Self { inner: Region::half_shell(dim, r_in, r_out).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn shifted_box(lower: Vec<f64>, edges: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: Region::shifted_box(lower, edges).map_err(to_py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn contains(&self, point: Vec<f64>) -> PyResult<bool> {
        self.inner.contains(&point).map_err(to_py_err)
    }

    /// Index of the equal-volume cell containing `point`, for count vectors.
    fn cell(&self, point: Vec<f64>, cells: usize) -> PyResult<usize> {
        self.inner.equal_volume_cell(&point, cells).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("Region(dim={}, volume={:.6e})", self.inner.dim(), self.inner.volume())
    }
}

/// Covolume-one lattice given by a row basis.
#[pyclass(frozen, name = "Lattice")]
struct PyLattice {
    inner: UnimodularLattice,
}

#[pymethods]
impl PyLattice {
    /// Build from basis rows; the determinant must be +-1 up to drift.
    #[staticmethod]
    fn from_basis(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("basis must be a square row matrix"));
        }
        let m = nalgebra_matrix(&rows);
        Ok(Self { inner: UnimodularLattice::from_basis(m).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn integer(n: usize) -> Self {
        Self { inner: UnimodularLattice::integer_lattice(n) }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    /// Basis as a list of rows.
    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        let b = self.inner.basis();
        (0..b.nrows()).map(|i| b.row(i).iter().copied().collect()).collect()
    }

    #[getter]
    fn det(&self) -> f64 {
        self.inner.det()
    }

    fn lll_reduced(&self) -> Self {
        Self { inner: self.inner.lll_reduced() }
    }

    /// All nonzero lattice points with norm <= radius, as
    /// (coefficient, coordinate) pairs. Coefficients are exact ints.
    #[pyo3(signature = (radius, cap=100_000))]
    fn enumerate_in_ball(
        &self,
        radius: f64,
        cap: usize,
    ) -> PyResult<Vec<(Vec<BigInt>, Vec<f64>)>> {
        let pts = self.inner.enumerate_in_ball(radius, cap).map_err(to_py_err)?;
        Ok(pts.into_iter().map(|p| (p.coeffs, p.coords)).collect())
    }

    /// Lattice points falling inside a region, enumerated out to its
    /// circumradius.
    #[pyo3(signature = (region, cap=100_000))]
    fn points_in_region(&self, region: &PyRegion, cap: usize) -> PyResult<Vec<Vec<f64>>> {
        let radius = region.inner.circumradius();
        let pts = self.inner.enumerate_in_ball(radius, cap).map_err(to_py_err)?;
        let cfg = ranlat::points::restrict_to_region(&pts, radius, &region.inner)
            .map_err(to_py_err)?;
        Ok(cfg.points().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Lattice(n={}, det={:+.3e})", self.inner.dim(), self.inner.det())
    }
}

fn nalgebra_matrix(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let n = rows.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Markov chain over covolume-one lattices; same kernel and seeding as the
/// Rust estimators, so samples agree with CLI output for equal parameters.
#[pyclass(name = "LatticeChain")]
struct PyLatticeChain {
    inner: LatticeChain,
}

#[pymethods]
impl PyLatticeChain {
    #[new]
    #[pyo3(signature = (n, seed, burnin=5000, thin=50))]
    fn new(n: usize, seed: u64, burnin: u64, thin: u64) -> PyResult<Self> {
        let inner = LatticeChain::new(n, seed, ChainParams { burnin, thin }).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn next_lattice(&mut self) -> PyResult<PyLattice> {
        Ok(PyLattice { inner: self.inner.next_lattice().map_err(to_py_err)? })
    }
}

/// Draw `count` lattices from one chain.
#[pyfunction]
#[pyo3(signature = (n, count, seed, burnin=5000, thin=50))]
fn sample_lattices(
    n: usize,
    count: usize,
    seed: u64,
    burnin: u64,
    thin: u64,
) -> PyResult<Vec<PyLattice>> {
    let mut chain = LatticeChain::new(n, seed, ChainParams { burnin, thin }).map_err(to_py_err)?;
    (0..count)
        .map(|_| Ok(PyLattice { inner: chain.next_lattice().map_err(to_py_err)? }))
        .collect()
}

/// One draw of a unit-intensity Poisson process on the region. `index`
/// selects the draw within the seed's stream.
#[pyfunction]
#[pyo3(signature = (region, seed, index=0))]
fn sample_poisson(region: &PyRegion, seed: u64, index: u64) -> PyResult<Vec<Vec<f64>>> {
    let mut rng = stream_rng(seed, "py.sample-poisson", index);
    let cfg = ranlat::poisson::sample_poisson(&region.inner, &mut rng).map_err(to_py_err)?;
    Ok(cfg.points().to_vec())
}

#[pyfunction]
fn poisson_pmf(lam: f64, k: u64) -> f64 {
    ranlat::poisson::poisson_pmf(lam, k)
}

/// Tail coefficient of the one-sided moment bound at subset size k.
#[pyfunction]
fn rank_drop_bound(n: usize, lam: f64, k: usize) -> f64 {
    ranlat::estimators::rank_drop_bound(n, lam, k)
}

/// Finite family of integer vectors with exact rank-deficiency counting.
#[pyclass(frozen, name = "VectorFamily")]
struct PyVectorFamily {
    inner: VectorFamily,
}

impl PyVectorFamily {
    fn mask(&self, indices: Option<Vec<usize>>) -> PyResult<Mask> {
        match indices {
            None => Ok(self.inner.full_mask()),
            Some(idx) => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= self.inner.len()) {
                    return Err(PyValueError::new_err(format!(
                        "index {bad} out of range for family of {}",
                        self.inner.len()
                    )));
                }
                Ok(mask_from_indices(idx))
            }
        }
    }
}

#[pymethods]
impl PyVectorFamily {
    #[new]
    fn new(dim: usize, vectors: Vec<Vec<BigInt>>) -> PyResult<Self> {
        Ok(Self { inner: VectorFamily::new(dim, vectors).map_err(to_py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Exact rank of the subset given by `indices` (whole family if omitted).
    #[pyo3(signature = (indices=None))]
    fn rank(&self, indices: Option<Vec<usize>>) -> PyResult<usize> {
        self.inner.rank_of(self.mask(indices)?).map_err(to_py_err)
    }

    /// 1 if the subset is linearly independent, else 0.
    #[pyo3(signature = (indices=None))]
    fn iota(&self, indices: Option<Vec<usize>>) -> PyResult<u64> {
        self.inner.iota(self.mask(indices)?).map_err(to_py_err)
    }

    /// Number of k-subsets of rank j.
    #[pyo3(signature = (k, j, indices=None))]
    fn rho(&self, k: usize, j: usize, indices: Option<Vec<usize>>) -> PyResult<u64> {
        self.inner.rho(self.mask(indices)?, k, j).map_err(to_py_err)
    }

    /// Independent k-subsets that some further family member extends to a
    /// dependent (k+1)-subset.
    #[pyo3(signature = (k, indices=None))]
    fn count_dk(&self, k: usize, indices: Option<Vec<usize>>) -> PyResult<u64> {
        self.inner.count_dk(self.mask(indices)?, k).map_err(to_py_err)
    }

    /// Two-sided truncation bound for the independence indicator of subset
    /// `a` within pool `b`: returns (lower, upper, indicator, ok) with the
    /// alternating sums truncated at odd order r1 and even order r2.
    fn check_lemma(
        &self,
        a: Vec<usize>,
        b: Vec<usize>,
        r1: usize,
        r2: usize,
    ) -> PyResult<(BigInt, BigInt, bool, bool)> {
        let a = self.mask(Some(a))?;
        let b = self.mask(Some(b))?;
        let chk = check_truncation_bounds(&self.inner, a, b, r1, r2).map_err(to_py_err)?;
        Ok((chk.lower, chk.upper, chk.indicator, chk.ok))
    }
}

/// Run a TOML experiment plan and return the suite report as a JSON string.
#[pyfunction]
#[pyo3(signature = (toml_text, workers=None))]
fn run_plan(toml_text: &str, workers: Option<usize>) -> PyResult<String> {
    let config = SuiteConfig::from_toml_str(toml_text).map_err(to_py_err)?;
    let report = ranlat::plan::run_suite(&config, workers).map_err(to_py_err)?;
    Ok(report.to_json())
}

#[pymodule]
fn ranlat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRegion>()?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyLatticeChain>()?;
    m.add_class::<PyVectorFamily>()?;
    m.add_function(wrap_pyfunction!(sample_lattices, m)?)?;
    m.add_function(wrap_pyfunction!(sample_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(rank_drop_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_plan, m)?)?;
    Ok(())
}
