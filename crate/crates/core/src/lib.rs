//! Spectral analysis of coherence in spatially invariant networks.
//!
//! Consensus and vehicular-formation feedback laws on the torus `Z_L^d` are
//! diagonalized by the spatial Fourier transform. Everything here works one
//! wavenumber at a time: assemble the small state-space symbol, solve its
//! Lyapunov equation, and sum (or integrate) the resulting H2-norm density.
//!
//! The crate is `no_std` with `alloc`. The `std` feature (on by default)
//! only forwards to dependencies; `parallel` spreads Monte Carlo
//! trajectories over a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN must fail these checks, hence `!(x > 0.0)` over `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod admissibility;
mod dense;
mod error;
pub mod lattice;
pub mod models;
mod quadrature;
pub mod sample;
pub mod scaling;
pub mod simulator;
pub mod small;
pub mod spectral;
mod sum;

pub use error::{Error, Result};
pub use lattice::{LocalArray, MultiIndex};
pub use models::{ModelKind, ModelSpec, Role, StateSpaceSymbol, Template, VelocityFeedback};
pub use num_complex::Complex64;
