//! File formats, the Monte Carlo harness and the acceptance suites for the
//! anisotropic KPZ growth model. The numerics live in `akpz-core`.

pub mod config;
pub mod error;
pub mod io;
pub mod stats;
pub mod suite;
pub mod tiling;

pub use error::{Error, Result};
