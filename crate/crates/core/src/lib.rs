//! Finite-element engine for the two-phase (solid biomass / interstitial
//! fluid) biofilm spread model on a 2D slice with a prescribed moving top
//! boundary.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the companion `biofilm` crate.
//!
//! Module map:
//!
//! * [`geometry`]: strip meshes with tagged boundaries, deformation maps and
//!   their Jacobian algebra.
//! * [`fem`]: Lagrange spaces of degree 1 and 2, assembly, Dirichlet
//!   elimination, sparse solvers and gradient recovery.
//! * [`mechanics`]: displacement, velocity (with the domain-derivative
//!   traction correction), pressure, pressure rate and Darcy velocity.
//! * [`volume_fraction`]: regularized stationary transport for the fluid
//!   fraction.
//! * [`concentration`]: stationary substrate advection-diffusion.
//! * [`moving_diffusion`]: parabolic problems on the moving domain, solved on
//!   the reference configuration.
//! * [`coupled`]: the per-slab fixed-point sweep and the height-flux
//!   diagnostic.
#![no_std]

extern crate alloc;

pub mod concentration;
pub mod coupled;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod math;
pub mod mechanics;
pub mod moving_diffusion;
pub mod profile;
pub mod volume_fraction;

pub use error::{Error, Result};
