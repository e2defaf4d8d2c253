//! Assemblages of common-cause quantum processes and their LOSR pre-order.
//!
//! The crate covers labelled tensor algebra, Choi operators and the link
//! product, the three assemblage families (channel, Bob-with-input and
//! measurement-device-independent), deterministic local strategies, the
//! semidefinite feasibility programs deciding free-ness and convertibility,
//! a level-1 moment-matrix relaxation of the quantum set, and
//! Bell-type functionals.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assemblage;
pub mod catalog;
pub mod choi;
pub mod error;
pub mod functionals;
mod math;
pub mod membership;
pub mod random;
pub mod sdp;
pub mod strategies;
pub mod tensor;

pub use error::Error;
pub use nalgebra::DMatrix;

/// Complex double.
pub type C64 = num_complex::Complex<f64>;
