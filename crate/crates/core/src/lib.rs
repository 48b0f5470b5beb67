//! Two-point correlations of the two-species q-TAZRP.
//!
//! The crate evaluates the exact six-term contour-integral formula for the
//! correlation observable, its large-time asymptotic expansion, and an
//! independent Monte Carlo estimate from a direct simulation of the particle
//! system.
//!
//! * [`specfun`]: q-Pochhammer symbols, incomplete gamma, erfc and the
//!   `C_n` polynomial family.
//! * [`contour`]: trapezoidal quadrature on circles and the contour integrals.
//! * [`exact`]: assembly of the six-term formula.
//! * [`asym`]: asymptotic evaluators and convergence-rate fits.
//! * [`sim`]: Gillespie simulation and the duality observable.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod asym;
pub mod contour;
pub mod conventions;
mod error;
pub mod exact;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};
