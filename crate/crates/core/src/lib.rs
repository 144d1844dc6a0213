//! Geodesic lines in hyperbolic continuum percolation.
//!
//! * [`hypgeo`]: points, geodesics and isometries of the hyperbolic plane.
//! * [`sampler`]: Poisson points on balls and the invariant Poisson line process.
//! * [`analytic`]: closed forms for the segment-containment probability `f(r)`,
//!   its decay exponent, and the integral-equation solver for the occupied set.
//! * [`percolation`]: Monte Carlo estimators built on the samplers.
//! * [`treecover`]: the reflection-group embedding of the 3-regular tree.
//! * [`render`]: SVG scenes in the Poincaré disk.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod hypgeo;
pub mod percolation;
pub mod quad;
pub mod render;
pub mod rng;
pub mod sampler;
pub mod treecover;

pub use error::{Error, Result};
pub use exec::Executor;
pub use hypgeo::{dist, Geodesic, GeodesicFrame, HPoint, IdealPoint, Isometry};
pub use rng::RngStream;
pub use sampler::{BooleanSample, LineSample, ModelParams};
