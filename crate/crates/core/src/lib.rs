//! Random covolume-one lattices versus the unit-intensity Poisson process.
//!
//! A Haar-random lattice of covolume one, restricted to a region of small
//! volume, looks statistically like a Poisson point process of intensity one
//! on that region. This crate provides both sides of that comparison:
//!
//! * exact integer/rational sieve combinatorics for rank-deficiency counting
//!   over finite vector families (two-sided alternating bounds on the
//!   indicator of full independence, and their weighted generalization),
//! * samplers for Haar-random unimodular lattices (an MCMC walk in general
//!   dimension, an exact rejection sampler in dimension two) and for the
//!   Poisson process on bounded regions,
//! * lattice-point enumeration inside balls with exact integer coordinates,
//! * Monte Carlo estimators that compare lattice statistics against their
//!   Poisson counterparts: moment identities, rank-deficiency frequencies,
//!   weighted-sum identities, and a plug-in lower bound on total variation.
//!
//! Everything randomized is reproducible: streams are keyed by an explicit
//! seed plus a label, and estimator output is byte-identical regardless of
//! worker count.

pub mod comb;
pub mod error;
pub mod estimators;
pub mod lattice;
pub mod plan;
pub mod points;
pub mod poisson;
pub mod region;
pub mod seeding;
pub mod sieve;
pub mod stats;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
