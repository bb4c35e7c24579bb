//! Numerical lab for radially symmetric, isentropic, compressible viscous
//! outflow through the unit sphere.
//!
//! The pure math kernels (`model`, `quadrature`, the cut-off functions) are
//! generic over the scalar type; the simulation layers run in `f64`, exposed
//! through the aliases below.

// `!(x > 0.0)` style guards are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod lagrangian;
pub mod model;
pub mod numeric;
pub mod quadrature;
pub mod solver;
pub mod stationary;
pub mod cli_io;

pub use error::{Error, Result};

/// Scalar type of the simulation layers.
pub type Real = f64;
/// Double-precision physical parameters.
pub type Params = model::Params<Real>;
/// Single-precision parameters, for the generic kernels only.
pub type Params32 = model::Params<f32>;
