//! SVG (d = 2) and PLY (d = 3) export of a tessellation.

use std::fmt::Write as _;

use crate::error::{Result, StitError};
use crate::geometry::{Point, Window};
use crate::mnw::Tessellation;

/// Part of the segment `a b` inside the disk, or `None`.
fn clip_to_disk(
    a: Point<f64>,
    b: Point<f64>,
    c: Point<f64>,
    r: f64,
) -> Option<(Point<f64>, Point<f64>)> {
    let v = b - a;
    let w = a - c;
    let qa = v.norm_squared();
    let qb = 2.0 * v.dot(&w);
    let qc = w.norm_squared() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let s0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let s1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    (s1 > s0).then(|| (a + v * s0, a + v * s1))
}

/// Planar tessellation as SVG: the window outline and every I-segment clipped
/// to the window. With `stroke_by_birth`, older segments are drawn thicker
/// (width from 3× down to 1× the base width as birth time goes from 0 to `t`).
pub fn render_svg(y: &Tessellation<f64>, stroke_by_birth: bool) -> Result<String> {
    if y.dim != 2 {
        return Err(StitError::InvalidArgument(format!(
            "SVG export needs d = 2, got d = {}",
            y.dim
        )));
    }
    let (lo, hi) = y.domain.bounding_box();
    let size = (hi - lo).norm();
    let pad = 0.02 * size;
    let base = size / 1000.0;
    // flip y so that the picture has the usual orientation
    let px = |p: Point<f64>| (p.x() - lo.x() + pad, hi.y() - p.y() + pad);
    let (w, h) = (hi.x() - lo.x() + 2.0 * pad, hi.y() - lo.y() + 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.6} {h:.6}" width="800" height="{:.0}">"#,
        800.0 * h / w
    );
    let _ = writeln!(
        s,
        r#"<g fill="none" stroke="black" stroke-linecap="round">"#
    );
    match &y.window {
        Window::Ball { center, radius, .. } => {
            let (cx, cy) = px(*center);
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.6}" cy="{cy:.6}" r="{radius:.6}" stroke-width="{:.6}"/>"#,
                2.0 * base
            );
        }
        Window::Polytope { polytope } => {
            // planar polytopes keep their vertices in boundary order
            let v = polytope.vertices();
            for i in 0..v.len() {
                let (x1, y1) = px(v[i]);
                let (x2, y2) = px(v[(i + 1) % v.len()]);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x1:.6}" y1="{y1:.6}" x2="{x2:.6}" y2="{y2:.6}" stroke-width="{:.6}"/>"#,
                    2.0 * base
                );
            }
        }
    }
    for f in &y.i_facets {
        let (a, b) = (f.facet.vertices[0], f.facet.vertices[1]);
        let seg = match &y.window {
            Window::Ball { center, radius, .. } => clip_to_disk(a, b, *center, *radius),
            Window::Polytope { .. } => Some((a, b)),
        };
        let Some((a, b)) = seg else { continue };
        let width = if stroke_by_birth && y.t_end > 0.0 {
            base * (1.0 + 2.0 * (1.0 - f.birth_time / y.t_end).clamp(0.0, 1.0))
        } else {
            base
        };
        let (x1, y1) = px(a);
        let (x2, y2) = px(b);
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.6}" y1="{y1:.6}" x2="{x2:.6}" y2="{y2:.6}" stroke-width="{width:.6}"/>"#
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Spatial tessellation as ASCII PLY: one polygon per I-facet (unclipped,
/// i.e. as constructed in the simulation domain) with its birth time.
pub fn render_ply(y: &Tessellation<f64>) -> Result<String> {
    if y.dim != 3 {
        return Err(StitError::InvalidArgument(format!(
            "PLY export needs d = 3, got d = {}",
            y.dim
        )));
    }
    let nv: usize = y.i_facets.iter().map(|f| f.facet.vertices.len()).sum();
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {nv}");
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    let _ = writeln!(s, "element face {}", y.i_facets.len());
    s.push_str("property list uchar int vertex_indices\nproperty double birth_time\nend_header\n");
    for f in &y.i_facets {
        for v in &f.facet.vertices {
            let _ = writeln!(s, "{:.9} {:.9} {:.9}", v.x(), v.y(), v.z());
        }
    }
    let mut next = 0usize;
    for f in &y.i_facets {
        let k = f.facet.vertices.len();
        let _ = write!(s, "{k}");
        for i in next..next + k {
            let _ = write!(s, " {i}");
        }
        let _ = writeln!(s, " {:.9}", f.birth_time);
        next += k;
    }
    Ok(s)
}
