//! Exact and numerical verification of one-loop renormalization for
//! holomorphic field theories on `C^d`.
//!
//! * [`grassmann`]: exact exterior algebra deciding when wheel integrands vanish.
//! * [`kernels`]: heat kernel, regulated propagator and Bochner–Martinelli kernel.
//! * [`weights`]: analytic wheel weights, their ε → 0 behaviour and the
//!   supporting identities.
//! * [`anomaly`]: wheels with a heat kernel on one edge.
//! * [`rgflow`]: exact one-loop homotopy RG flow on a finite-dimensional toy model.

pub mod anomaly;
pub mod error;
pub mod grassmann;
pub mod kernels;
pub mod poly;
pub mod quadrature;
pub mod rgflow;
pub mod special;
pub mod testfn;
pub mod weights;

pub use error::{Error, Result};
