use serde::{Deserialize, Serialize};

use super::point::{plane_basis, Point};
use super::polytope::{ConvexPolytope, FacetPolygon, Tolerance};
use super::GeometryError;
use crate::formulas::kappa;
use crate::scalar::{lit, Real};

/// Observation window: a convex polytope or an analytic ball.
///
/// Balls are simulated in their bounding cube ([`Window::domain`]); the law of
/// the construction restricted to a convex subset does not depend on the
/// enclosing domain, so measuring inside the ball afterwards is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", rename_all = "snake_case", tag = "kind")]
pub enum Window<T> {
    Polytope {
        polytope: ConvexPolytope<T>,
    },
    Ball {
        dim: usize,
        center: Point<T>,
        radius: T,
    },
}

impl<T: Real> Window<T> {
    pub fn polytope(p: ConvexPolytope<T>) -> Self {
        Window::Polytope { polytope: p }
    }

    pub fn ball(dim: usize, center: Point<T>, radius: T) -> Result<Self, GeometryError> {
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if !(radius > T::zero()) || !center.is_finite() {
            return Err(GeometryError::InvalidInput(
                "ball needs a positive radius".into(),
            ));
        }
        Ok(Window::Ball {
            dim,
            center,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Polytope { polytope } => polytope.dim(),
            Window::Ball { dim, .. } => *dim,
        }
    }

    pub fn volume(&self) -> T {
        match self {
            Window::Polytope { polytope } => polytope.volume(),
            Window::Ball { dim, radius, .. } => kappa::<T>(*dim) * radius.powi(*dim as i32),
        }
    }

    pub fn diameter(&self) -> T {
        match self {
            Window::Polytope { polytope } => polytope.diameter(),
            Window::Ball { radius, .. } => *radius * lit(2.0),
        }
    }

    pub fn mean_width(&self) -> T {
        match self {
            Window::Polytope { polytope } => polytope.mean_width(),
            Window::Ball { radius, .. } => *radius * lit(2.0),
        }
    }

    /// The polytope actually subdivided by the simulator.
    pub fn domain(&self) -> ConvexPolytope<T> {
        match self {
            Window::Polytope { polytope } => polytope.clone(),
            Window::Ball {
                dim,
                center,
                radius,
            } => ConvexPolytope::centered_cube(*dim, center, *radius).expect("valid ball"),
        }
    }

    pub fn tolerance(&self) -> Tolerance<T> {
        Tolerance::for_window(self.domain().diameter())
    }

    /// Distance from `p` to the boundary, positive inside.
    pub fn depth(&self, p: &Point<T>) -> T {
        match self {
            Window::Polytope { polytope } => polytope.depth(p),
            Window::Ball { center, radius, .. } => *radius - p.distance(center),
        }
    }

    pub fn scaled(&self, m: T) -> Self {
        match self {
            Window::Polytope { polytope } => Window::Polytope {
                polytope: polytope.scaled(m),
            },
            Window::Ball {
                dim,
                center,
                radius,
            } => Window::Ball {
                dim: *dim,
                center: *center * m,
                radius: *radius * m,
            },
        }
    }

    /// Largest δ for which the eroded window `W ⊖ δ` is nonempty.
    pub fn inradius(&self) -> T {
        match self {
            Window::Ball { radius, .. } => *radius,
            Window::Polytope { polytope } => {
                // depth is concave; evaluate at the vertex centroid and refine
                // by a coarse pattern search
                let mut best = polytope.centroid();
                let mut val = polytope.depth(&best);
                let mut step = polytope.diameter() * lit(0.25);
                let dim = polytope.dim();
                while step > polytope.diameter() * lit(1e-9) {
                    let mut improved = false;
                    for i in 0..dim {
                        for s in [step, -step] {
                            let mut q = best;
                            q.coords[i] += s;
                            let v = polytope.depth(&q);
                            if v > val {
                                best = q;
                                val = v;
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        step = step * lit(0.5);
                    }
                }
                val
            }
        }
    }

    /// `(d-1)`-volume of `facet ∩ W` for a facet produced inside [`Window::domain`].
    pub fn facet_measure(&self, facet: &FacetPolygon<T>) -> T {
        match self {
            Window::Polytope { .. } => facet.area,
            Window::Ball {
                dim,
                center,
                radius,
            } => match dim {
                1 => {
                    if facet.vertices[0].distance(center) < *radius {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                2 => segment_in_ball(&facet.vertices[0], &facet.vertices[1], center, *radius),
                _ => polygon_in_ball(&facet.vertices, &facet.carrier.normal, center, *radius),
            },
        }
    }
}

/// Length of the part of segment `ab` inside the ball `B(c, R)`.
pub fn segment_in_ball<T: Real>(a: &Point<T>, b: &Point<T>, c: &Point<T>, radius: T) -> T {
    let d = *b - *a;
    let f = *a - *c;
    let aa = d.norm_squared();
    if aa == T::zero() {
        return T::zero();
    }
    let bb = f.dot(&d);
    let cc = f.norm_squared() - radius * radius;
    let disc = bb * bb - aa * cc;
    if disc <= T::zero() {
        return T::zero();
    }
    let sq = disc.sqrt();
    let t1 = ((-bb - sq) / aa).max(T::zero());
    let t2 = ((-bb + sq) / aa).min(T::one());
    if t2 <= t1 {
        return T::zero();
    }
    (t2 - t1) * aa.sqrt()
}

/// Area of a planar convex polygon (3D loop with unit normal `n`) inside `B(c, R)`.
pub fn polygon_in_ball<T: Real>(verts: &[Point<T>], n: &Point<T>, c: &Point<T>, radius: T) -> T {
    let h = (verts[0] - *c).dot(n);
    let rho2 = radius * radius - h * h;
    if rho2 <= T::zero() {
        return T::zero();
    }
    let rho = rho2.sqrt();
    let center = *c + *n * h;
    let (e1, e2) = plane_basis(n);
    let pts: Vec<(T, T)> = verts
        .iter()
        .map(|v| {
            let q = *v - center;
            (q.dot(&e1), q.dot(&e2))
        })
        .collect();
    let mut acc = T::zero();
    for i in 0..pts.len() {
        acc += triangle_disk_signed(pts[i], pts[(i + 1) % pts.len()], rho);
    }
    acc.abs()
}

/// Signed area of triangle `(0, a, b)` intersected with the disk of radius `r` at 0.
fn triangle_disk_signed<T: Real>(a: (T, T), b: (T, T), r: T) -> T {
    let half: T = lit(0.5);
    let cross = |p: (T, T), q: (T, T)| p.0 * q.1 - p.1 * q.0;
    let dot = |p: (T, T), q: (T, T)| p.0 * q.0 + p.1 * q.1;
    let sector = |p: (T, T), q: (T, T)| half * r * r * cross(p, q).atan2(dot(p, q));
    let d = (b.0 - a.0, b.1 - a.1);
    let aa = dot(d, d);
    if aa == T::zero() {
        return T::zero();
    }
    let bb = dot(a, d);
    let cc = dot(a, a) - r * r;
    let disc = bb * bb - aa * cc;
    if disc <= T::zero() {
        return sector(a, b);
    }
    let sq = disc.sqrt();
    let s1 = ((-bb - sq) / aa).max(T::zero()).min(T::one());
    let s2 = ((-bb + sq) / aa).max(T::zero()).min(T::one());
    let p1 = (a.0 + d.0 * s1, a.1 + d.1 * s1);
    let p2 = (a.0 + d.0 * s2, a.1 + d.1 * s2);
    sector(a, p1) + half * cross(p1, p2) + sector(p2, b)
}
