//! Bounded convex polytopes in dimension 1, 2 and 3.
//!
//! Representation per dimension:
//! - d = 1: two endpoints on the x axis, `vertices[0] < vertices[1]`;
//! - d = 2: vertices in counterclockwise order;
//! - d = 3: vertex list plus face loops, each loop counterclockwise when seen
//!   from outside (so the Newell normal points outward).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::hyperplane::Hyperplane;
use super::point::{plane_basis, Point};
use super::GeometryError;
use crate::scalar::{lit, Real};

/// Absolute tolerance derived from the simulation window.
///
/// `geom` is the on-plane threshold. A split is rejected as degenerate when a
/// piece is thinner than `geom` across the cut, i.e. when its volume is below
/// `geom · Vol_{d-1}(F)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<T> {
    pub geom: T,
}

impl<T: Real> Tolerance<T> {
    /// `geom = rel * diameter` with the scalar's relative epsilon.
    pub fn for_window(diameter: T) -> Self {
        Self {
            geom: T::geom_rel_eps() * diameter,
        }
    }
}

/// The `(d-1)`-dimensional section `P ∩ H` created by a split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FacetPolygon<T> {
    /// d = 1: the single point; d = 2: segment endpoints; d = 3: a loop
    /// counterclockwise around `carrier.normal`.
    pub vertices: Vec<Point<T>>,
    pub carrier: Hyperplane<T>,
    /// `(d-1)`-volume: 1 for a point, the length of a segment, polygon area.
    pub area: T,
}

impl<T: Real> FacetPolygon<T> {
    /// Lexicographically smallest vertex (the facet's reference point).
    pub fn lexmin_vertex(&self) -> Point<T> {
        let mut best = self.vertices[0];
        for v in &self.vertices[1..] {
            if v.lex_less(&best) {
                best = *v;
            }
        }
        best
    }

    pub fn scaled(&self, m: T, dim: usize) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| *v * m).collect(),
            carrier: self.carrier.scaled(m),
            area: self.area * m.powi(dim as i32 - 1),
        }
    }

    /// Maximal distance between two vertices.
    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }
}

/// Result of [`ConvexPolytope::split`].
#[derive(Clone, Debug)]
pub struct Split<T> {
    /// Piece on the side `<x, u> > r`.
    pub plus: ConvexPolytope<T>,
    /// Piece on the side `<x, u> < r`.
    pub minus: ConvexPolytope<T>,
    pub facet: FacetPolygon<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "T: Real",
    try_from = "PolytopeRepr<T>",
    into = "PolytopeRepr<T>"
)]
pub struct ConvexPolytope<T> {
    dim: usize,
    vertices: Vec<Point<T>>,
    face_index: Vec<u32>,
    face_start: Vec<u32>,
    volume: T,
}

/// Serialized form: plain vertex coordinates plus face loops for d = 3.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PolytopeRepr<T> {
    pub dim: usize,
    pub vertices: Vec<Vec<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faces: Vec<Vec<u32>>,
}

impl<T: Real> From<ConvexPolytope<T>> for PolytopeRepr<T> {
    fn from(p: ConvexPolytope<T>) -> Self {
        let faces = (0..p.face_count()).map(|i| p.face(i).to_vec()).collect();
        Self {
            dim: p.dim,
            vertices: p
                .vertices
                .iter()
                .map(|v| v.coords[..p.dim].to_vec())
                .collect(),
            faces,
        }
    }
}

impl<T: Real> TryFrom<PolytopeRepr<T>> for ConvexPolytope<T> {
    type Error = GeometryError;

    fn try_from(r: PolytopeRepr<T>) -> Result<Self, Self::Error> {
        let pts: Vec<Point<T>> = r.vertices.iter().map(|v| Point::from_slice(v)).collect();
        match r.dim {
            1 => {
                if pts.len() != 2 {
                    return Err(GeometryError::InvalidInput(
                        "interval needs 2 endpoints".into(),
                    ));
                }
                Self::interval(pts[0].x(), pts[1].x())
            }
            2 => Self::polygon(pts),
            3 if r.faces.is_empty() => Self::convex_hull_3d(&pts),
            3 => Self::from_faces(pts, r.faces),
            d => Err(GeometryError::UnsupportedDimension(d)),
        }
    }
}

impl<T: Real> ConvexPolytope<T> {
    // ----------------------------------------------------------------- build

    pub fn interval(a: T, b: T) -> Result<Self, GeometryError> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if !(hi - lo > T::zero()) || !lo.is_finite() || !hi.is_finite() {
            return Err(GeometryError::InvalidInput(
                "interval must have positive length".into(),
            ));
        }
        Ok(Self {
            dim: 1,
            vertices: vec![Point::from_slice(&[lo]), Point::from_slice(&[hi])],
            face_index: Vec::new(),
            face_start: vec![0],
            volume: hi - lo,
        })
    }

    /// Convex polygon from vertices in either orientation (stored CCW).
    pub fn polygon(mut vertices: Vec<Point<T>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidInput(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        for v in vertices.iter_mut() {
            v.coords[2] = T::zero();
        }
        let mut area = shoelace(&vertices);
        if area < T::zero() {
            vertices.reverse();
            area = -area;
        }
        if !(area > T::zero()) {
            return Err(GeometryError::InvalidInput("polygon has zero area".into()));
        }
        let n = vertices.len();
        let scale = bounding_diameter(&vertices);
        let eps = T::geom_rel_eps() * scale * scale;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross2(&(b - a), &(c - b)) < -eps {
                return Err(GeometryError::InvalidInput("polygon is not convex".into()));
            }
        }
        Ok(Self {
            dim: 2,
            vertices,
            face_index: Vec::new(),
            face_start: vec![0],
            volume: area,
        })
    }

    /// Convex hull of planar points (monotone chain).
    pub fn convex_hull_2d(points: &[Point<T>]) -> Result<Self, GeometryError> {
        let mut pts: Vec<Point<T>> = points.to_vec();
        pts.sort_by(|a, b| {
            a.x()
                .partial_cmp(&b.x())
                .unwrap()
                .then(a.y().partial_cmp(&b.y()).unwrap())
        });
        pts.dedup();
        if pts.len() < 3 {
            return Err(GeometryError::InvalidInput(
                "hull needs 3 distinct points".into(),
            ));
        }
        let mut hull: Vec<Point<T>> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Point<T>>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for p in iter {
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if cross2(&(b - a), &(*p - b)) <= T::zero() {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(*p);
            }
            hull.pop();
        }
        Self::polygon(hull)
    }

    /// 3-polytope from vertices and face loops. Orientation is normalized.
    pub fn from_faces(
        vertices: Vec<Point<T>>,
        faces: Vec<Vec<u32>>,
    ) -> Result<Self, GeometryError> {
        if vertices.len() < 4 || faces.len() < 4 {
            return Err(GeometryError::InvalidInput(
                "3-polytope needs >= 4 vertices and faces".into(),
            ));
        }
        let mut face_index = Vec::new();
        let mut face_start = vec![0u32];
        for f in &faces {
            if f.len() < 3 || f.iter().any(|&i| i as usize >= vertices.len()) {
                return Err(GeometryError::InvalidInput("bad face loop".into()));
            }
            face_index.extend_from_slice(f);
            face_start.push(face_index.len() as u32);
        }
        let mut p = Self {
            dim: 3,
            vertices,
            face_index,
            face_start,
            volume: T::zero(),
        };
        let vol = p.compute_volume_3d();
        if vol < T::zero() {
            for i in 0..p.face_count() {
                let (s, e) = (p.face_start[i] as usize, p.face_start[i + 1] as usize);
                p.face_index[s..e].reverse();
            }
        }
        p.volume = vol.abs();
        if !(p.volume > T::zero()) {
            return Err(GeometryError::InvalidInput(
                "3-polytope has zero volume".into(),
            ));
        }
        p.validate_3d()?;
        Ok(p)
    }

    /// Convex hull of a small 3D point set (brute force over supporting planes).
    pub fn convex_hull_3d(points: &[Point<T>]) -> Result<Self, GeometryError> {
        let n = points.len();
        if n < 4 {
            return Err(GeometryError::InvalidInput("3D hull needs 4 points".into()));
        }
        let scale = bounding_diameter(points);
        let eps = T::geom_rel_eps() * scale * lit(1e3);
        let mut planes: Vec<(Point<T>, T)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let Some(nrm) = (points[j] - points[i])
                        .cross(&(points[k] - points[i]))
                        .normalized()
                    else {
                        continue;
                    };
                    let off = nrm.dot(&points[i]);
                    let mut above = false;
                    let mut below = false;
                    for p in points {
                        let s = nrm.dot(p) - off;
                        above |= s > eps;
                        below |= s < -eps;
                    }
                    let cand = match (above, below) {
                        (false, true) => (nrm, off),
                        (true, false) => (-nrm, -off),
                        (false, false) => {
                            return Err(GeometryError::InvalidInput("points are coplanar".into()))
                        }
                        (true, true) => continue,
                    };
                    let dup = planes.iter().any(|(m, o)| {
                        (*m - cand.0).norm() < lit(1e-9) && (*o - cand.1).abs() <= eps
                    });
                    if !dup {
                        planes.push(cand);
                    }
                }
            }
        }
        // keep only vertices that are extreme (appear on >= 3 planes)
        let mut faces = Vec::new();
        let mut used = vec![false; n];
        let mut face_members = Vec::new();
        for (nrm, off) in &planes {
            let members: Vec<usize> = (0..n)
                .filter(|&m| (nrm.dot(&points[m]) - *off).abs() <= eps)
                .collect();
            face_members.push(members);
        }
        let mut incidence = vec![0usize; n];
        for m in &face_members {
            for &v in m {
                incidence[v] += 1;
            }
        }
        for ((nrm, _), members) in planes.iter().zip(&face_members) {
            let members: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&v| incidence[v] >= 3)
                .collect();
            let loop_ = order_around(points, &members, nrm);
            for &v in &loop_ {
                used[v] = true;
            }
            faces.push(loop_);
        }
        let mut remap = vec![u32::MAX; n];
        let mut verts = Vec::new();
        for i in 0..n {
            if used[i] {
                remap[i] = verts.len() as u32;
                verts.push(points[i]);
            }
        }
        let faces = faces
            .into_iter()
            .map(|f| f.into_iter().map(|v| remap[v]).collect::<Vec<u32>>())
            .collect();
        Self::from_faces(verts, faces)
    }

    /// Axis-aligned box `[lo, hi]` in dimension `lo.len()`.
    pub fn cuboid(lo: &[T], hi: &[T]) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
            return Err(GeometryError::InvalidInput(
                "box corners must have equal length 1..=3".into(),
            ));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
            return Err(GeometryError::InvalidInput(
                "box must have positive extents".into(),
            ));
        }
        match lo.len() {
            1 => Self::interval(lo[0], hi[0]),
            2 => Self::polygon(vec![
                Point::from_slice(&[lo[0], lo[1]]),
                Point::from_slice(&[hi[0], lo[1]]),
                Point::from_slice(&[hi[0], hi[1]]),
                Point::from_slice(&[lo[0], hi[1]]),
            ]),
            _ => {
                let v = |i: usize| {
                    Point::new(
                        if i & 1 == 0 { lo[0] } else { hi[0] },
                        if i & 2 == 0 { lo[1] } else { hi[1] },
                        if i & 4 == 0 { lo[2] } else { hi[2] },
                    )
                };
                let vertices = (0..8).map(v).collect();
                let faces = vec![
                    vec![0, 2, 3, 1], // z = lo
                    vec![4, 5, 7, 6], // z = hi
                    vec![0, 1, 5, 4], // y = lo
                    vec![2, 6, 7, 3], // y = hi
                    vec![0, 4, 6, 2], // x = lo
                    vec![1, 3, 7, 5], // x = hi
                ];
                Self::from_faces(vertices, faces)
            }
        }
    }

    /// Cube `[-half, half]^d` centred at `center`.
    pub fn centered_cube(dim: usize, center: &Point<T>, half: T) -> Result<Self, GeometryError> {
        let lo: Vec<T> = (0..dim).map(|i| center.coords[i] - half).collect();
        let hi: Vec<T> = (0..dim).map(|i| center.coords[i] + half).collect();
        Self::cuboid(&lo, &hi)
    }

    // ------------------------------------------------------------- accessors

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    /// Number of stored face loops (d = 3 only; 0 otherwise).
    pub fn face_count(&self) -> usize {
        self.face_start.len() - 1
    }

    pub fn face(&self, i: usize) -> &[u32] {
        &self.face_index[self.face_start[i] as usize..self.face_start[i + 1] as usize]
    }

    pub fn faces(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.face_count()).map(move |i| self.face(i))
    }

    /// `(min, max)` of `<v, u>` over the vertices.
    #[inline]
    pub fn support_interval(&self, u: &Point<T>) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for v in &self.vertices {
            let s = v.dot(u);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    }

    /// Width of the polytope in direction `u` (unit vector).
    pub fn support_width(&self, u: &Point<T>) -> T {
        let (lo, hi) = self.support_interval(u);
        hi - lo
    }

    pub fn diameter(&self) -> T {
        bounding_diameter(&self.vertices)
    }

    pub fn centroid(&self) -> Point<T> {
        let n = T::from_usize(self.vertices.len()).unwrap();
        self.vertices.iter().fold(Point::zero(), |acc, v| acc + *v) * (T::one() / n)
    }

    /// Axis-aligned extents `(lo, hi)` per coordinate.
    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        let mut lo = Point::new(T::infinity(), T::infinity(), T::infinity());
        let mut hi = -lo;
        for v in &self.vertices {
            for i in 0..3 {
                lo.coords[i] = lo.coords[i].min(v.coords[i]);
                hi.coords[i] = hi.coords[i].max(v.coords[i]);
            }
        }
        (lo, hi)
    }

    /// Mean width `b(P)`: length (d=1), perimeter/π (d=2), or
    /// `(1/4π) Σ_edges ℓ(e) θ_ext(e)` (d=3).
    pub fn mean_width(&self) -> T {
        match self.dim {
            1 => self.volume,
            2 => self.surface_area() / T::PI(),
            _ => {
                let normals: Vec<Point<T>> = (0..self.face_count())
                    .map(|f| self.face_vector_area(f))
                    .collect();
                let mut owner: HashMap<(u32, u32), usize> =
                    HashMap::with_capacity(self.face_index.len());
                for f in 0..self.face_count() {
                    let face = self.face(f);
                    for i in 0..face.len() {
                        owner.insert((face[i], face[(i + 1) % face.len()]), f);
                    }
                }
                let mut acc = T::zero();
                for f in 0..self.face_count() {
                    let face = self.face(f);
                    for i in 0..face.len() {
                        let (a, b) = (face[i], face[(i + 1) % face.len()]);
                        if a > b {
                            continue;
                        }
                        let Some(&g) = owner.get(&(b, a)) else {
                            debug_assert!(false, "unmatched edge in face structure");
                            continue;
                        };
                        let (Some(nf), Some(ng)) =
                            (normals[f].normalized(), normals[g].normalized())
                        else {
                            continue;
                        };
                        let cosang = nf.dot(&ng).max(-T::one()).min(T::one());
                        let len = self.vertices[a as usize].distance(&self.vertices[b as usize]);
                        acc += len * cosang.acos();
                    }
                }
                acc / (lit::<T>(4.0) * T::PI())
            }
        }
    }

    /// Per-facet `(d-1)`-volumes: endpoint counts (d=1), edge lengths, face areas.
    pub fn facet_areas(&self) -> Vec<T> {
        match self.dim {
            1 => vec![T::one(), T::one()],
            2 => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| self.vertices[i].distance(&self.vertices[(i + 1) % n]))
                    .collect()
            }
            _ => (0..self.face_count())
                .map(|f| self.face_vector_area(f).norm())
                .collect(),
        }
    }

    pub fn surface_area(&self) -> T {
        self.facet_areas().into_iter().sum()
    }

    /// Outward unit normals and offsets of the supporting facet hyperplanes:
    /// `P = ∩ {x : <x, n> <= offset}`.
    pub fn halfspaces(&self) -> Vec<(Point<T>, T)> {
        match self.dim {
            1 => vec![
                (-Point::axis(0), -self.vertices[0].x()),
                (Point::axis(0), self.vertices[1].x()),
            ],
            2 => {
                let n = self.vertices.len();
                (0..n)
                    .filter_map(|i| {
                        let a = self.vertices[i];
                        let b = self.vertices[(i + 1) % n];
                        let d = b - a;
                        Point::new(d.y(), -d.x(), T::zero())
                            .normalized()
                            .map(|nrm| (nrm, nrm.dot(&a)))
                    })
                    .collect()
            }
            _ => (0..self.face_count())
                .filter_map(|f| {
                    let nrm = self.face_vector_area(f).normalized()?;
                    let v = self.vertices[self.face(f)[0] as usize];
                    Some((nrm, nrm.dot(&v)))
                })
                .collect(),
        }
    }

    /// Signed distance from `p` to the boundary, positive inside.
    pub fn depth(&self, p: &Point<T>) -> T {
        self.halfspaces()
            .iter()
            .map(|(n, off)| *off - n.dot(p))
            .fold(T::infinity(), |a, b| a.min(b))
    }

    pub fn contains(&self, p: &Point<T>, eps: T) -> bool {
        self.depth(p) >= -eps
    }

    pub fn scaled(&self, m: T) -> Self {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            *v = *v * m;
        }
        out.volume = self.volume * m.powi(self.dim as i32);
        out
    }

    pub fn translated(&self, shift: &Point<T>) -> Self {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            *v = *v + *shift;
        }
        out
    }

    // ------------------------------------------------------------- splitting

    /// Cuts the polytope along `h`. See [`Split`] for the side convention.
    pub fn split(&self, h: &Hyperplane<T>, tol: &Tolerance<T>) -> Result<Split<T>, GeometryError> {
        match self.dim {
            1 => self.split_1d(h, tol),
            2 => self.split_2d(h, tol),
            3 => self.split_3d(h, tol),
            d => Err(GeometryError::UnsupportedDimension(d)),
        }
    }

    /// The section `P ∩ H`, if `H` hits the interior.
    pub fn section(&self, h: &Hyperplane<T>, tol: &Tolerance<T>) -> Option<FacetPolygon<T>> {
        match self.dim {
            1 | 2 => self.split(h, tol).ok().map(|s| s.facet),
            _ => {
                let sides = self.classify(h, tol.geom)?;
                let (points, _) = self.section_points_3d(h, &sides);
                section_polygon(&points, h)
            }
        }
    }

    fn classify(&self, h: &Hyperplane<T>, eps: T) -> Option<Vec<i8>> {
        let mut has_plus = false;
        let mut has_minus = false;
        let sides: Vec<i8> = self
            .vertices
            .iter()
            .map(|v| {
                let s = h.signed_distance(v);
                if s > eps {
                    has_plus = true;
                    1
                } else if s < -eps {
                    has_minus = true;
                    -1
                } else {
                    0
                }
            })
            .collect();
        (has_plus && has_minus).then_some(sides)
    }

    fn split_1d(&self, h: &Hyperplane<T>, tol: &Tolerance<T>) -> Result<Split<T>, GeometryError> {
        let ux = h.normal.x();
        if ux == T::zero() {
            return Err(GeometryError::NoIntersection);
        }
        let x0 = h.offset / ux;
        let (a, b) = (self.vertices[0].x(), self.vertices[1].x());
        if !(x0 > a + tol.geom && x0 < b - tol.geom) {
            return Err(GeometryError::NoIntersection);
        }
        if x0 - a < tol.geom || b - x0 < tol.geom {
            return Err(GeometryError::DegenerateSplit);
        }
        let left = Self::interval(a, x0)?;
        let right = Self::interval(x0, b)?;
        let (plus, minus) = if ux > T::zero() {
            (right, left)
        } else {
            (left, right)
        };
        Ok(Split {
            plus,
            minus,
            facet: FacetPolygon {
                vertices: vec![Point::from_slice(&[x0])],
                carrier: *h,
                area: T::one(),
            },
        })
    }

    fn split_2d(&self, h: &Hyperplane<T>, tol: &Tolerance<T>) -> Result<Split<T>, GeometryError> {
        let sides = self
            .classify(h, tol.geom)
            .ok_or(GeometryError::NoIntersection)?;
        let n = self.vertices.len();
        let mut plus = Vec::with_capacity(n + 2);
        let mut minus = Vec::with_capacity(n + 2);
        let mut cut = Vec::with_capacity(2);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (self.vertices[i], self.vertices[j]);
            let (sa, sb) = (sides[i], sides[j]);
            if sa >= 0 {
                plus.push(a);
            }
            if sa <= 0 {
                minus.push(a);
            }
            if sa == 0 {
                cut.push(a);
            }
            if sa * sb < 0 {
                let p = edge_point(&a, &b, h);
                plus.push(p);
                minus.push(p);
                cut.push(p);
            }
        }
        if plus.len() < 3 || minus.len() < 3 || cut.len() < 2 {
            return Err(GeometryError::DegenerateSplit);
        }
        let dir = Point::new(-h.normal.y(), h.normal.x(), T::zero());
        let (mut lo, mut hi) = (cut[0], cut[0]);
        for p in &cut[1..] {
            if p.dot(&dir) < lo.dot(&dir) {
                lo = *p;
            }
            if p.dot(&dir) > hi.dot(&dir) {
                hi = *p;
            }
        }
        let length = lo.distance(&hi);
        let (pa, ma) = (shoelace(&plus), shoelace(&minus));
        let min_vol = tol.geom * length;
        if pa < min_vol || ma < min_vol || !(length > T::zero()) {
            return Err(GeometryError::DegenerateSplit);
        }
        let mk = |vertices: Vec<Point<T>>, volume: T| Self {
            dim: 2,
            vertices,
            face_index: Vec::new(),
            face_start: vec![0],
            volume,
        };
        Ok(Split {
            plus: mk(plus, pa),
            minus: mk(minus, ma),
            facet: FacetPolygon {
                vertices: vec![lo, hi],
                carrier: *h,
                area: length,
            },
        })
    }

    /// Vertex list extended by edge crossings; returns the on-plane vertex ids
    /// and the extended vertex list.
    fn section_points_3d(&self, h: &Hyperplane<T>, sides: &[i8]) -> (Vec<Point<T>>, Vec<u32>) {
        let mut all = self.vertices.clone();
        let mut on_plane = Vec::new();
        let mut memo: Vec<(u32, u32, u32)> = Vec::new();
        for f in self.faces() {
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                let (sa, sb) = (sides[a as usize], sides[b as usize]);
                if sa == 0 {
                    on_plane.push(a);
                }
                if sa * sb < 0 {
                    let id = crossing_id(&mut memo, &mut all, a, b, h);
                    on_plane.push(id);
                }
            }
        }
        on_plane.sort_unstable();
        on_plane.dedup();
        let pts = on_plane.iter().map(|&i| all[i as usize]).collect();
        (pts, on_plane)
    }

    fn split_3d(&self, h: &Hyperplane<T>, tol: &Tolerance<T>) -> Result<Split<T>, GeometryError> {
        let sides = self
            .classify(h, tol.geom)
            .ok_or(GeometryError::NoIntersection)?;
        let mut all = self.vertices.clone();
        let mut memo: Vec<(u32, u32, u32)> = Vec::new();
        let mut on_plane: Vec<u32> = Vec::new();
        let mut plus_idx = Vec::with_capacity(self.face_index.len() + 8);
        let mut plus_start = vec![0u32];
        let mut minus_idx = Vec::with_capacity(self.face_index.len() + 8);
        let mut minus_start = vec![0u32];
        let mut pf: Vec<u32> = Vec::with_capacity(16);
        let mut mf: Vec<u32> = Vec::with_capacity(16);
        for f in self.faces() {
            pf.clear();
            mf.clear();
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                let (sa, sb) = (sides[a as usize], sides[b as usize]);
                if sa >= 0 {
                    pf.push(a);
                }
                if sa <= 0 {
                    mf.push(a);
                }
                if sa == 0 {
                    on_plane.push(a);
                }
                if sa * sb < 0 {
                    let id = crossing_id(&mut memo, &mut all, a, b, h);
                    pf.push(id);
                    mf.push(id);
                    on_plane.push(id);
                }
            }
            if pf.len() >= 3 {
                plus_idx.extend_from_slice(&pf);
                plus_start.push(plus_idx.len() as u32);
            }
            if mf.len() >= 3 {
                minus_idx.extend_from_slice(&mf);
                minus_start.push(minus_idx.len() as u32);
            }
        }
        on_plane.sort_unstable();
        on_plane.dedup();
        if on_plane.len() < 3 {
            return Err(GeometryError::DegenerateSplit);
        }
        let cap = order_ids_around(&all, &on_plane, &h.normal);
        // minus piece: outward cap normal is +u (counterclockwise order)
        minus_idx.extend_from_slice(&cap);
        minus_start.push(minus_idx.len() as u32);
        plus_idx.extend(cap.iter().rev());
        plus_start.push(plus_idx.len() as u32);

        let vertices: Vec<Point<T>> = cap.iter().map(|&i| all[i as usize]).collect();
        let area = polygon_area_3d(&vertices);
        if !(area > T::zero()) {
            return Err(GeometryError::DegenerateSplit);
        }
        let plus = compact_3d(&all, plus_idx, plus_start);
        let minus = compact_3d(&all, minus_idx, minus_start);
        let min_vol = tol.geom * area;
        if plus.volume < min_vol || minus.volume < min_vol {
            return Err(GeometryError::DegenerateSplit);
        }
        Ok(Split {
            plus,
            minus,
            facet: FacetPolygon {
                vertices,
                carrier: *h,
                area,
            },
        })
    }

    // --------------------------------------------------------------- helpers

    /// Newell vector area of face `f` (outward, magnitude = area).
    fn face_vector_area(&self, f: usize) -> Point<T> {
        let face = self.face(f);
        let o = self.vertices[face[0] as usize];
        let mut acc = Point::zero();
        for i in 1..face.len() - 1 {
            let a = self.vertices[face[i] as usize] - o;
            let b = self.vertices[face[i + 1] as usize] - o;
            acc = acc + a.cross(&b);
        }
        acc * lit(0.5)
    }

    fn compute_volume_3d(&self) -> T {
        let o = self.vertices[0];
        let mut six = T::zero();
        for f in self.faces() {
            let a = self.vertices[f[0] as usize] - o;
            for i in 1..f.len() - 1 {
                let b = self.vertices[f[i] as usize] - o;
                let c = self.vertices[f[i + 1] as usize] - o;
                six += a.dot(&b.cross(&c));
            }
        }
        six / lit(6.0)
    }

    /// Convexity (within tolerance) and Euler relation for d = 3.
    pub fn validate_3d(&self) -> Result<(), GeometryError> {
        let eps = T::geom_rel_eps() * self.diameter() * lit(1e3);
        for (n, off) in self.halfspaces() {
            for v in &self.vertices {
                if n.dot(v) - off > eps {
                    return Err(GeometryError::InvalidInput(
                        "3-polytope is not convex".into(),
                    ));
                }
            }
        }
        let edges = self.face_index.len() / 2;
        let euler = self.vertices.len() as i64 - edges as i64 + self.face_count() as i64;
        if euler != 2 || self.face_index.len() % 2 != 0 {
            return Err(GeometryError::InvalidInput(format!(
                "face structure violates V - E + F = 2 (got {euler})"
            )));
        }
        Ok(())
    }

    /// Number of undirected edges (d = 3), sides (d = 2) or 1 (d = 1).
    pub fn edge_count(&self) -> usize {
        match self.dim {
            1 => 1,
            2 => self.vertices.len(),
            _ => self.face_index.len() / 2,
        }
    }
}

fn shoelace<T: Real>(v: &[Point<T>]) -> T {
    let n = v.len();
    let o = v[0];
    let mut acc = T::zero();
    for i in 1..n - 1 {
        acc += cross2(&(v[i] - o), &(v[i + 1] - o));
    }
    acc * lit(0.5)
}

#[inline]
fn cross2<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    a.x() * b.y() - a.y() * b.x()
}

fn bounding_diameter<T: Real>(pts: &[Point<T>]) -> T {
    let mut d2 = T::zero();
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d2 = d2.max((*a - *b).norm_squared());
        }
    }
    d2.sqrt()
}

#[inline]
fn edge_point<T: Real>(a: &Point<T>, b: &Point<T>, h: &Hyperplane<T>) -> Point<T> {
    let sa = h.signed_distance(a);
    let sb = h.signed_distance(b);
    let lambda = sa / (sa - sb);
    *a + (*b - *a) * lambda
}

fn crossing_id<T: Real>(
    memo: &mut Vec<(u32, u32, u32)>,
    all: &mut Vec<Point<T>>,
    a: u32,
    b: u32,
    h: &Hyperplane<T>,
) -> u32 {
    let key = if a < b { (a, b) } else { (b, a) };
    if let Some(&(_, _, id)) = memo.iter().find(|(x, y, _)| (*x, *y) == key) {
        return id;
    }
    // interpolate from the lower index so both traversal directions agree
    let p = edge_point(&all[key.0 as usize], &all[key.1 as usize], h);
    let id = all.len() as u32;
    all.push(p);
    memo.push((key.0, key.1, id));
    id
}

/// Sorts point ids counterclockwise around `normal` (seen from its tip).
fn order_ids_around<T: Real>(all: &[Point<T>], ids: &[u32], normal: &Point<T>) -> Vec<u32> {
    let (e1, e2) = plane_basis(normal);
    let n = T::from_usize(ids.len()).unwrap();
    let c = ids
        .iter()
        .fold(Point::zero(), |acc, &i| acc + all[i as usize])
        * (T::one() / n);
    let mut keyed: Vec<(T, u32)> = ids
        .iter()
        .map(|&i| {
            let d = all[i as usize] - c;
            (d.dot(&e2).atan2(d.dot(&e1)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn order_around<T: Real>(points: &[Point<T>], ids: &[usize], normal: &Point<T>) -> Vec<usize> {
    let as_u32: Vec<u32> = ids.iter().map(|&i| i as u32).collect();
    order_ids_around(points, &as_u32, normal)
        .into_iter()
        .map(|i| i as usize)
        .collect()
}

fn compact_3d<T: Real>(all: &[Point<T>], mut idx: Vec<u32>, start: Vec<u32>) -> ConvexPolytope<T> {
    let mut remap = vec![u32::MAX; all.len()];
    let mut vertices = Vec::with_capacity(16);
    for i in idx.iter_mut() {
        let r = &mut remap[*i as usize];
        if *r == u32::MAX {
            *r = vertices.len() as u32;
            vertices.push(all[*i as usize]);
        }
        *i = *r;
    }
    let mut p = ConvexPolytope {
        dim: 3,
        vertices,
        face_index: idx,
        face_start: start,
        volume: T::zero(),
    };
    p.volume = p.compute_volume_3d();
    p
}

/// Area of a planar polygon loop embedded in 3D.
pub fn polygon_area_3d<T: Real>(v: &[Point<T>]) -> T {
    if v.len() < 3 {
        return T::zero();
    }
    let o = v[0];
    let mut acc = Point::zero();
    for i in 1..v.len() - 1 {
        acc = acc + (v[i] - o).cross(&(v[i + 1] - o));
    }
    acc.norm() * lit(0.5)
}

fn section_polygon<T: Real>(points: &[Point<T>], h: &Hyperplane<T>) -> Option<FacetPolygon<T>> {
    if points.len() < 3 {
        return None;
    }
    let ids: Vec<u32> = (0..points.len() as u32).collect();
    let order = order_ids_around(points, &ids, &h.normal);
    let vertices: Vec<Point<T>> = order.iter().map(|&i| points[i as usize]).collect();
    let area = polygon_area_3d(&vertices);
    (area > T::zero()).then(|| FacetPolygon {
        vertices,
        carrier: *h,
        area,
    })
}
