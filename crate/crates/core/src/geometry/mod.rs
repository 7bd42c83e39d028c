//! Convex geometry in dimension 1 to 3 plus the numerical helpers the
//! analytic formulas need.

mod covariance;
mod hyperplane;
mod point;
mod polytope;
pub mod quad;
pub mod special;
mod window;

pub use covariance::set_covariance_ball;
pub use hyperplane::Hyperplane;
pub use point::{plane_basis, Point};
pub use polytope::{ConvexPolytope, FacetPolygon, PolytopeRepr, Split, Tolerance};
pub use quad::quad_1d;
pub use window::{polygon_in_ball, segment_in_ball, Window};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("split produced a piece below the volume tolerance")]
    DegenerateSplit,
    #[error("hyperplane does not hit the interior of the polytope")]
    NoIntersection,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("quadrature did not converge within the depth limit")]
    NonConvergence,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hyperplane rejection sampler exceeded its retry budget")]
    RejectionOverflow,
}
