//! Geometry-of-numbers kernels for sums of reciprocals of fractional parts
//! of linear forms.
//!
//! The crate is `no_std` with `alloc`; all IO lives in the `recipsum` crate.

#![no_std]
extern crate alloc;

pub mod counting;
pub mod error;
pub mod lattice;
pub mod normal;
pub mod numerics;
pub mod partition;
pub mod sums;
pub mod weights;

pub use error::{Error, Result};
