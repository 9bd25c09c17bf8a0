//! Extended-real Moreau arithmetic, top-k gauge and k-support norms, a
//! Fenchel–Moreau conjugacy engine over finite grids, closed-form Capra
//! conjugates of the ℓ0 pseudonorm, and its hidden convex extension L0.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through [`libm`].

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod conjugacy;
pub mod hidden_convexity;
pub mod l0;
pub mod norms;
pub mod xreal;

pub use conjugacy::{capra_eval, normalize, sphere_grid, Coupling, GridFunction, Mapping};
pub use norms::{gauge_norm, support_norm, Vector};
pub use xreal::ExtReal;
