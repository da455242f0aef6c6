//! Exact symbolic verification and classification of the homogeneous
//! structure equations of complex Engel 4-manifolds.
//!
//! The crate builds the canonical coframing's structure equations over an
//! exact coefficient field (Gaussian rationals extended by real parameters,
//! conjugate pairs, and unit-circle pairs), checks d² = 0 residues for the
//! six named homogeneous families, realifies models into 4-dimensional real
//! Lie algebras and identifies them, decides compact-quotient obstructions
//! by exact volume-form exactness factors, certifies lattice parameters for
//! the one-parameter compact family with rigorous high-precision numerics,
//! and validates explicit local coordinate charts against their models.

pub mod error;
pub mod scalar;
pub mod exterior;
pub mod models;
pub mod classify;
pub mod liealg;
pub mod compactness;
pub mod coords;
mod ratlin;

pub use error::{Error, Result};
