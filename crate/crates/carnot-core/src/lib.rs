#![cfg_attr(not(feature = "std"), no_std)]

//! Computational geometry in two-step Carnot (stratified) groups.
//!
//! The crate provides, over a user-defined or built-in step-2 graded Lie
//! algebra:
//!
//! * exact group arithmetic in exponential coordinates ([`group`]),
//! * calibrated homogeneous gauge distances and ball sampling ([`metric`]),
//! * a sparse exterior algebra with weighted degrees ([`multivector`]),
//! * implicit polynomial submanifolds with exact derivative oracles and
//!   pointwise degree computed by three independent routes ([`submanifold`]),
//! * intrinsic blow-up varieties at arbitrary (including horizontal) points,
//!   with numerical Hausdorff-convergence checks ([`blowup`]),
//! * surface-measure scaling fits and density-limit comparisons ([`measure`]),
//! * box-counting dimension estimates under the homogeneous distance
//!   ([`dimension`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); the companion
//! `carnot-cli` crate carries configuration files, CSV/JSON output, and the
//! command-line driver.

extern crate alloc;

pub mod blowup;
pub mod dimension;
pub mod group;
pub mod measure;
pub mod metric;
pub mod multivector;
pub mod poly;
pub mod submanifold;

mod error;
mod fit;
mod linalg;
mod math;
mod rng;

pub use error::{Error, Result};
