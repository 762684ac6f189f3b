//! Kernel Lagrange bases on bounded domains.
//!
//! The crate builds full, truncated, and local Lagrange functions for Matérn and
//! surface-spline kernels and measures how they behave: exponential decay,
//! Riesz-type stability, and Bernstein (inverse) inequalities.
//!
//! - [`geometry`]: point sets, fill distance / separation radius, collar extension, footprints.
//! - [`kernels`]: kernel evaluation, the auxiliary polynomial space, Bessel functions.
//! - [`interpolation`]: saddle-point systems and full Lagrange functions.
//! - [`localization`]: truncated and local Lagrange functions, Gram bounds.
//! - [`diagnostics`]: norms, decay fits, and rate sweeps.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod interpolation;
pub mod kernels;
pub mod linalg;
pub mod localization;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{DomainRegion, Footprint, GeometryStats, PointSet};
pub use interpolation::{BasisVariant, CoefficientMatrix, Expansion, KernelExpansion, LagrangeFunction, SaddleSystem};
pub use kernels::{KernelFamily, KernelSpec, PolynomialBasis};
