//! Finite-window estimators for first- and second-order characteristics.
//!
//! Typical-facet statistics use minus-sampling: a facet is sampled when its
//! reference point (the lexicographically smallest vertex) lies in the eroded
//! window `W ⊖ δ`. Every sampled facet of diameter at most `δ` is then fully
//! observed, so the sample is exact for the law restricted to sizes `<= δ`;
//! sampled facets leaving `W` are counted as censored.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::geometry::{ConvexPolytope, FacetPolygon, GeometryError, Hyperplane, Point, Window};
use crate::mnw::Tessellation;

pub use crate::stats::{aggregate, normality_diagnostics, EstimateWithError, NormalityDiagnostics};

/// Per-replicate record used by the aggregation layer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub index: u64,
    pub total_surface: f64,
    pub vertex_count: u64,
    pub i_facet_count: u64,
    /// Facets counted by the reference-point rule.
    pub reference_facet_count: u64,
    pub checkpoint_totals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facet_sizes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facet_birth_times: Vec<f64>,
}

impl ReplicateSummary {
    pub fn from_tessellation(index: u64, y: &Tessellation<f64>) -> Self {
        Self {
            index,
            total_surface: y.summary.total_surface,
            vertex_count: y.summary.interior_vertex_count,
            i_facet_count: y.summary.facet_count,
            reference_facet_count: y.summary.reference_facet_count,
            checkpoint_totals: y.checkpoints.iter().map(|c| c.surface).collect(),
            facet_sizes: Vec::new(),
            facet_birth_times: Vec::new(),
        }
    }
}

/// `Σ Vol_{d-1}(F ∩ W)` over all I-facets.
pub fn total_surface(y: &Tessellation<f64>) -> f64 {
    y.summary.total_surface
}

/// Vertices (facet vertices strictly inside `W`) per unit volume.
pub fn vertex_intensity(y: &Tessellation<f64>) -> f64 {
    y.summary.interior_vertex_count as f64 / y.window.volume()
}

/// I-facets per unit volume, counted by the reference-point rule.
pub fn facet_intensity(y: &Tessellation<f64>) -> f64 {
    y.summary.reference_facet_count as f64 / y.window.volume()
}

/// Minus-sampled facet sizes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FacetSample {
    /// `(d-1)`-volumes of sampled facets lying entirely inside `W`.
    pub sizes: Vec<f64>,
    /// Largest vertex distance of each sampled facet (same order as `sizes`).
    pub diameters: Vec<f64>,
    /// Sampled facets that leave `W`.
    pub censored: usize,
    pub erosion: f64,
}

impl FacetSample {
    /// Sizes of facets with diameter `<= δ`: an exact sample of the size law
    /// restricted to that event.
    pub fn fully_observed(&self) -> Vec<f64> {
        self.sizes
            .iter()
            .zip(&self.diameters)
            .filter(|(_, d)| **d <= self.erosion)
            .map(|(s, _)| *s)
            .collect()
    }
}

/// Minus-sampling of the typical I-facet with erosion `δ`.
pub fn isegment_sample(y: &Tessellation<f64>, delta: f64) -> Result<FacetSample> {
    if !(delta >= 0.0) {
        return Err(StitError::InvalidArgument(
            "erosion must be nonnegative".into(),
        ));
    }
    if y.i_facets.len() as u64 != y.summary.facet_count {
        return Err(StitError::InvalidArgument(
            "facet sampling needs recorded facets".into(),
        ));
    }
    let eps = y.window.tolerance().geom;
    let mut out = FacetSample {
        erosion: delta,
        ..Default::default()
    };
    for f in &y.i_facets {
        if y.window.depth(&f.facet.lexmin_vertex()) < delta.max(eps) {
            continue;
        }
        let inside = f.facet.vertices.iter().all(|v| y.window.depth(v) > eps);
        if inside {
            out.sizes.push(f.facet.area);
            out.diameters.push(f.facet.diameter());
        } else {
            out.censored += 1;
        }
    }
    if out.sizes.is_empty() {
        return Err(StitError::EmptySample);
    }
    Ok(out)
}

/// Volume of the eroded window `W ⊖ δ`.
pub fn eroded_volume(window: &Window<f64>, delta: f64) -> Result<f64> {
    match window {
        Window::Ball { dim, radius, .. } => {
            let r = (radius - delta).max(0.0);
            Ok(crate::formulas::kappa::<f64>(*dim) * r.powi(*dim as i32))
        }
        Window::Polytope { polytope } => Ok(erode(polytope, delta)?.map_or(0.0, |p| p.volume())),
    }
}

/// `P ⊖ δ` as a polytope (`None` when empty).
pub fn erode(p: &ConvexPolytope<f64>, delta: f64) -> Result<Option<ConvexPolytope<f64>>> {
    if delta == 0.0 {
        return Ok(Some(p.clone()));
    }
    let tol = crate::geometry::Tolerance::for_window(p.diameter());
    let mut cur = p.clone();
    for (n, off) in p.halfspaces() {
        let h = Hyperplane::canonical_unchecked(n, off - delta);
        let outward_is_plus = h.normal.dot(&n) > 0.0;
        match cur.split(&h, &tol) {
            Ok(s) => cur = if outward_is_plus { s.minus } else { s.plus },
            Err(GeometryError::NoIntersection) | Err(GeometryError::DegenerateSplit) => {
                let c = cur.centroid();
                if n.dot(&c) > off - delta {
                    return Ok(None);
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Some(cur))
}

/// Weighted surface element used by the second-order estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceElement {
    pub center: Point<f64>,
    pub weight: f64,
    /// Index of the facet the element belongs to.
    pub facet: usize,
}

/// Splits facets into elements of diameter at most `h` (inside `W` only).
pub fn discretize(
    facets: &[FacetPolygon<f64>],
    dim: usize,
    window: &Window<f64>,
    h: f64,
) -> Vec<SurfaceElement> {
    let mut out = Vec::new();
    for (k, f) in facets.iter().enumerate() {
        let start = out.len();
        match dim {
            1 => out.push(SurfaceElement {
                center: f.vertices[0],
                weight: 1.0,
                facet: k,
            }),
            2 => {
                let (a, b) = (f.vertices[0], f.vertices[1]);
                let n = (f.area / h).ceil().max(1.0) as usize;
                let w = f.area / n as f64;
                for i in 0..n {
                    let c = a + (b - a) * ((i as f64 + 0.5) / n as f64);
                    out.push(SurfaceElement {
                        center: c,
                        weight: w,
                        facet: k,
                    });
                }
            }
            _ => {
                let o = f.vertices[0];
                for i in 1..f.vertices.len() - 1 {
                    subdivide_triangle(o, f.vertices[i], f.vertices[i + 1], h, &mut out);
                }
            }
        }
        for e in &mut out[start..] {
            e.facet = k;
        }
    }
    out.retain(|e| window.depth(&e.center) >= 0.0);
    out
}

fn subdivide_triangle(
    a: Point<f64>,
    b: Point<f64>,
    c: Point<f64>,
    h: f64,
    out: &mut Vec<SurfaceElement>,
) {
    let longest = a.distance(&b).max(b.distance(&c)).max(c.distance(&a));
    let n = (longest / h).ceil().max(1.0) as usize;
    // n² congruent sub-triangles
    let u = (b - a) * (1.0 / n as f64);
    let v = (c - a) * (1.0 / n as f64);
    let area = 0.5 * u.cross(&v).norm();
    for i in 0..n {
        for j in 0..n - i {
            let p = a + u * i as f64 + v * j as f64;
            out.push(SurfaceElement {
                center: p + (u + v) * (1.0 / 3.0),
                weight: area,
                facet: 0,
            });
            if i + j + 1 < n {
                out.push(SurfaceElement {
                    center: p + (u + v) * (2.0 / 3.0),
                    weight: area,
                    facet: 0,
                });
            }
        }
    }
}

/// Reduced second moment function estimate on `r_grid`.
///
/// `K̂(r) = Σ_{p ∈ W⊖δ} w_p Σ_q m_r(p, q) / (t² Vol(W⊖δ))` with
/// `m_r(p, q) = w_q 1{‖p−q‖ <= r}` for element centers, including `q = p`.
/// In d = 2, elements of the same segment instead use the exact length of
/// `q` within distance `r` of the center of `p`: equally spaced centers on a
/// line would otherwise count `(2⌊r/η⌋ + 1) η` instead of `2r` per unit
/// length, a bias of up to one element size.
pub fn k_function_estimate(
    facets: &[FacetPolygon<f64>],
    window: &Window<f64>,
    t: f64,
    r_grid: &[f64],
    delta: f64,
    h: f64,
) -> Result<Vec<(f64, f64)>> {
    let dim = window.dim();
    let r_max = r_grid.iter().cloned().fold(0.0, f64::max);
    let r_min = r_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(r_min > 0.0) || r_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(StitError::InvalidArgument(
            "r grid must be positive and sorted".into(),
        ));
    }
    if r_max > delta {
        return Err(StitError::InvalidArgument(format!(
            "r_max {r_max} exceeds the erosion {delta}"
        )));
    }
    if h > r_min / 10.0 * (1.0 + 1e-12) {
        return Err(StitError::InvalidArgument(format!(
            "element size {h} exceeds r_min/10"
        )));
    }
    let area = eroded_volume(window, delta)?;
    if !(area > 0.0) {
        return Err(StitError::InvalidArgument("eroded window is empty".into()));
    }
    let elems = discretize(facets, dim, window, h);
    let cell = r_max + h;
    let key = |p: &Point<f64>| -> [i64; 3] {
        [
            (p.x() / cell).floor() as i64,
            (p.y() / cell).floor() as i64,
            (p.z() / cell).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, e) in elems.iter().enumerate() {
        grid.entry(key(&e.center)).or_default().push(i);
    }
    let r2: Vec<f64> = r_grid.iter().map(|r| r * r).collect();
    let mut sums = vec![0.0; r_grid.len()];
    let span: i64 = if dim >= 3 { 1 } else { 0 };
    let span_y: i64 = if dim >= 2 { 1 } else { 0 };
    for p in &elems {
        if window.depth(&p.center) < delta {
            continue;
        }
        let k = key(&p.center);
        for dx in -1..=1 {
            for dy in -span_y..=span_y {
                for dz in -span..=span {
                    let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                        continue;
                    };
                    for &j in list {
                        let q = &elems[j];
                        let d2 = (p.center - q.center).norm_squared();
                        if dim == 2 && p.facet == q.facet {
                            let s = d2.sqrt();
                            let half = 0.5 * q.weight;
                            if s - half >= r_max {
                                continue;
                            }
                            for (acc, r) in sums.iter_mut().zip(r_grid) {
                                let len = (s + half).min(*r) - (s - half).max(-r);
                                *acc += p.weight * len.clamp(0.0, q.weight);
                            }
                            continue;
                        }
                        if d2 > r2[r2.len() - 1] {
                            continue;
                        }
                        let w = p.weight * q.weight;
                        for (acc, rr) in sums.iter_mut().zip(&r2).rev() {
                            if d2 <= *rr {
                                *acc += w;
                            } else {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    let norm = 1.0 / (t * t * area);
    Ok(r_grid
        .iter()
        .zip(sums)
        .map(|(r, s)| (*r, s * norm))
        .collect())
}

/// Pair-correlation on shells from a K curve: `(r_mid, ΔK / (κ_d Δ r^d))`.
pub fn pcf_from_k(dim: usize, k: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let kd = crate::formulas::kappa::<f64>(dim);
    k.windows(2)
        .map(|w| {
            let (r0, k0) = w[0];
            let (r1, k1) = w[1];
            (
                0.5 * (r0 + r1),
                (k1 - k0) / (kd * (r1.powi(dim as i32) - r0.powi(dim as i32))),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erosion_of_box() {
        let p = ConvexPolytope::cuboid(&[0.0, 0.0], &[10.0, 6.0]).unwrap();
        let w = Window::polytope(p.clone());
        assert!((eroded_volume(&w, 2.0).unwrap() - 12.0).abs() < 1e-9);
        assert_eq!(eroded_volume(&w, 3.5).unwrap(), 0.0);
        let c = ConvexPolytope::cuboid(&[0.0; 3], &[4.0; 3]).unwrap();
        assert!((eroded_volume(&Window::polytope(c), 1.0).unwrap() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_subdivision_conserves_area() {
        let mut out = Vec::new();
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.3);
        let c = Point::new(0.2, 0.9, 0.0);
        subdivide_triangle(a, b, c, 0.05, &mut out);
        let total: f64 = out.iter().map(|e| e.weight).sum();
        let exact = 0.5 * (b - a).cross(&(c - a)).norm();
        assert!((total - exact).abs() < 1e-12);
    }
}
