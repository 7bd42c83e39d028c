//! Simulation and analytic verification of STIT tessellations.
//!
//! The library is generic over the scalar type ([`scalar::Real`], implemented
//! for `f32` and `f64`); the aliases below fix `f64`, which is what the
//! simulator, the estimators and the command line tool use.

pub mod cli;
pub mod compare;
pub mod error;
pub mod estimators;
pub mod formulas;
pub mod geometry;
pub mod measures;
pub mod mnw;
pub mod scalar;
pub mod stats;

pub use error::{Result, StitError};
pub use scalar::Real;

pub type Point = geometry::Point<f64>;
pub type Hyperplane = geometry::Hyperplane<f64>;
pub type Polytope = geometry::ConvexPolytope<f64>;
pub type Facet = geometry::FacetPolygon<f64>;
pub type Window = geometry::Window<f64>;
pub type MeasureSpec = measures::HyperplaneMeasureSpec<f64>;
pub type Tessellation = mnw::Tessellation<f64>;
