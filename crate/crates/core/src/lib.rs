//! Numerical laboratory for generalized Wigner matrices.
//!
//! The crate is organised around six areas:
//!
//! * [`ensembles`]: variance profiles, standardized entry laws, moment matching and
//!   reproducible sampling of Hermitian / real symmetric matrices.
//! * [`semicircle`]: closed-form semicircle density, distribution function, classical
//!   eigenvalue locations and the Stieltjes transform `m_sc`.
//! * [`spectral`]: dense eigendecomposition and direct spectral statistics.
//! * [`resolvent`]: Green-function analytics, smoothed counting, overlap reconstruction,
//!   Helffer–Sjöstrand traces and local-law audits.
//! * [`comparison`]: Lindeberg swapping, resolvent expansions and two-ensemble experiments.
//! * [`harness`]: seeds, trial orchestration, statistics kernels, configuration and reports.
//!
//! Eigenvalue and matrix indices in the public API are 1-based (`alpha = 1` is the
//! smallest eigenvalue, `i = 1` the first coordinate), matching the usual notation
//! `N |u_1(1)|^2`.

pub mod comparison;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod quad;
pub mod resolvent;
pub mod semicircle;
mod simd;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
