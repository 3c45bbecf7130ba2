//! Equivalent quantum ensembles, purification, pluggable state-vector
//! dynamics and no-signaling audits over small dense Hilbert spaces.
//!
//! The library is organized in layers:
//!
//! - [`hilbert`] — dense complex vectors and matrices, Hermitian
//!   eigendecomposition, unitary completion, trace distance.
//! - [`ensemble`] — weighted state ensembles, density matrices, spectral
//!   decompositions and the mixing-matrix machinery relating equivalent
//!   ensembles.
//! - [`purification`] — shared entangled states carrying two equivalent
//!   ensembles at once, and remote preparation by basis measurement.
//! - [`dynamics`] — unitary, nonlinear, Lindblad and quantum-jump
//!   evolutions of states, densities and ensembles.
//! - [`auditor`] — checks that equivalent ensembles stay equivalent under
//!   a given dynamics, that the induced density map is convex-linear, and
//!   that jump unravelings average back to the master equation.

pub mod auditor;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod hilbert;
pub mod purification;

pub use error::{Error, Result};
