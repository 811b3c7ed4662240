//! Surface-mode dynamics and control for a quadrotor fused with a floating pontoon.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerics:
//!
//! - [`model`]: vehicle parameters, the generalized state and buoyancy-balance validation
//! - [`kinematics`]: rotation and Euler-rate matrices, generalized inertia, Coriolis vector
//! - [`hydro`]: linear damping and hydrostatic restoring forces/moments
//! - [`actuation`]: four-motor mixing, inverse allocation and thrust projection
//! - [`sim`]: the state derivative and a fixed-step RK4 integrator
//! - [`control`]: PI loops for surface navigation and reference generators
//! - [`tuning`]: constraint-driven gain search
//! - [`metrics`]: step-response metrics and percent-deviation comparison
//!
//! IO, configuration files and the command line live in the `quadfloat` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod actuation;
pub mod control;
mod error;
pub mod hydro;
pub mod kinematics;
pub mod metrics;
pub mod model;
pub mod sim;
pub mod tuning;

pub use error::{Error, Result};
pub use model::{GeneralizedState, VehicleParams, Wrench};

pub use nalgebra::{Matrix3, Vector3};
