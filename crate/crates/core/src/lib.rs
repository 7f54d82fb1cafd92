//! Spherical Fourier analysis of oscillating multipliers on rank-one
//! symmetric spaces.

pub mod error;
pub mod geometry;
pub mod groups;
pub mod kernels;
pub mod kunze_stein;
pub mod multipliers;
pub mod quadrature;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
pub use geometry::{make_space, Family, ModelPoint, SpaceParams};
