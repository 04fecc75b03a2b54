//! Numerical geometry of complex hyperbolic space `CH^n(-4k^2)`: curvature,
//! Jacobi fields, lambda-convex hypersurfaces, volumes and boundary areas of
//! convex domains, and the asymptotics of volume/area along expanding families.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod hypersurfaces;
pub mod jacobi;
pub mod measure;
pub mod model;
pub mod quadrature;
pub mod special;

pub use error::{GeometryError, Result};
pub use model::{AmbientVector, SpaceParams, SpacePoint, TangentFrame, TangentVector};
