//! Core numerics for the 2+1 dimensional anisotropic KPZ growth model on
//! interlacing particle arrays.
//!
//! Everything here is `no_std` with `alloc`: particle dynamics, Toeplitz-like
//! transition matrices on finite windows, the determinantal correlation
//! kernel, and the closed-form macroscopic geometry. File formats, the command
//! line and the multi-threaded Monte Carlo harness live in the `akpz` crate.

#![no_std]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod interlacing;
pub mod kernel;
pub mod linalg;
pub mod quad;
pub mod rng;
pub mod transfer;

pub use error::{Error, Result};
pub use interlacing::{InterlacingArray, LozengeType, SpaceTimePoint};
pub use rng::RngStream;
