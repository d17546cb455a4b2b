//! Radial harmonic analysis on hyperbolic space.

mod kernels;
mod spherical;
mod transform;

pub use kernels::*;
pub use spherical::*;
pub use transform::*;
