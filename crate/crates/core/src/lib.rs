//! Numerical verification of the sharp Riesz-Fejer inequality on harmonic
//! Hardy spaces of the unit disk.
//!
//! For `1 < p < inf` and `f` harmonic in `h^p`,
//!
//! ```text
//! integral_{-1}^{1} |f(r)|^p dr  <=  K_p integral_0^{2 pi} |f(e^{i theta})|^p d theta,
//! K_p = 1 / (2 cos^p(pi/(2p))).
//! ```
//!
//! The crate computes the constants, re-checks each integral identity of the
//! Schur-test argument behind the bound by independent quadrature, and probes
//! the inequality with random and near-extremal harmonic functions.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod constants;
pub mod error;
pub mod experiments;
pub mod poisson;
pub mod quadrature;
pub mod schur;
pub mod selftest;

pub use constants::{Exponent, SharpConstants};
pub use error::{Error, Result};
pub use quadrature::{QuadratureResult, SingularityHint};
