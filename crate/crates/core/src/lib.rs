//! Classical steady states, bifurcations and linearized quantum fluctuations
//! of a ring cavity filled with an isotropic Kerr medium and driven by a
//! linearly polarized pump.
//!
//! Everything below [`params`] works in normalized units: time in units of
//! the inverse cavity decay rate, amplitudes scaled by the nonlinear
//! coupling. Mode 1 is polarized parallel to the pump, mode 2 orthogonal to
//! it. Fluctuation vectors are ordered `(δα1, δα1⁺, δα2, δα2⁺)`.
//!
//! The crate is `no_std` (with `alloc`) when built without the `std`
//! feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod linalg;
pub mod linfluct;
pub mod params;
pub mod sdesim;
pub mod squeeze;
pub mod steady;
pub mod stokes;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix4, C64};
pub use params::{ModelParams, PhysicalParams, Sign};
pub use steady::{Branch, SteadyState, Stability};
