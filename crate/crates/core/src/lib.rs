//! Simulation and finite-n verification of the circular law for non-central random
//! matrices `(X_n + M_n)/√n`, where `X_n` has i.i.d. standardized entries and `M_n` is a
//! deterministic perturbation of low rank and bounded Hilbert–Schmidt growth.
//!
//! The modules mirror the comparison between `A_n = X_n/√n` and `B_n = (X_n + M_n)/√n`:
//!
//! - [`ensemble`]: entry laws, reproducible sampling, perturbations, assembly.
//! - [`spectral`]: eigenvalues, singular values, log-determinants, Weyl's inequality.
//! - [`measures`]: empirical measures, Kolmogorov distances, integration by parts,
//!   distances to the uniform law on the unit disc.
//! - [`diagnostics`]: log-determinant differences over a z-grid, the rank inequality,
//!   scaling of extreme singular values, test-function probes, the rank-one outlier
//!   and the Green identity.
//! - [`harness`]: JSON experiment configs and CSV/JSON reports.

pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod lemmas;
pub mod matrix;
pub mod measures;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
