//! Nonlocal diffusion `u_t = ∫J(d(x,y))u(y)dμ_y − u` on spherically
//! symmetric model manifolds: Euclidean space, the round sphere, hyperbolic
//! space and the circle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod hfourier;
pub mod kernels;
pub mod nonlocal_op;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{ManifoldKind, RadialManifold};
pub use grid::{GridLayout, RadialGrid, RadialGridFunction};
pub use kernels::{Kernel, NormalizationMode};
pub use nonlocal_op::ConvolutionMatrix;
pub use spectral::SpectralData;
