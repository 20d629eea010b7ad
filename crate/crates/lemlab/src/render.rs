//! Marching-squares contour extraction of log|P| = 0 and SVG output.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::critical::CriticalSet;
use crate::error::{Error, Result};
use crate::poly::RootedPolynomial;

/// Flag tolerance: a corner or saddle-center value this close to zero means
/// the contour topology is perturbation-sensitive at this resolution.
const CONTOUR_DEGENERACY_TOL: f64 = 1e-9;

const BOX_MARGIN: f64 = 1.05;

/// Closed polylines approximating the lemniscate boundary.
#[derive(Debug, Clone)]
pub struct ContourSet {
    pub contours: Vec<Vec<(f64, f64)>>,
    /// Square sampling box [-half_width, half_width]^2.
    pub half_width: f64,
    pub resolution: usize,
    /// Some sampled value sat on the contour within tolerance (typically a
    /// saddle with critical value exactly 1).
    pub near_degenerate: bool,
}

/// A grid edge between two corner samples, identified by the lower-left
/// corner index and its direction. Segment endpoints key on these, so
/// chaining matches bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeId {
    /// Horizontal edge from corner (ix, iy) to (ix + 1, iy).
    H(usize, usize),
    /// Vertical edge from corner (ix, iy) to (ix, iy + 1).
    V(usize, usize),
}

/// Extract the zero contours of log|P| by marching squares over corner
/// samples, with linear interpolation along edges and the center sample
/// deciding saddle cells.
pub fn extract_contours(poly: &RootedPolynomial, resolution: usize) -> Result<ContourSet> {
    if resolution < 64 {
        return Err(Error::InvalidInput(format!(
            "contour resolution must be at least 64, got {resolution}"
        )));
    }
    let half_width = poly.root_bound() + BOX_MARGIN;
    let res = resolution;
    let step = 2.0 * half_width / res as f64;
    let coord = |i: usize| -half_width + i as f64 * step;
    let value = |x: f64, y: f64| poly.log_abs_eval(Complex64::new(x, y)).log_abs;

    // Corner samples, row-major on a (res+1)^2 lattice.
    let mut corners = vec![0.0f64; (res + 1) * (res + 1)];
    let mut near_degenerate = false;
    for iy in 0..=res {
        let y = coord(iy);
        for ix in 0..=res {
            let v = value(coord(ix), y);
            if v.abs() < CONTOUR_DEGENERACY_TOL {
                near_degenerate = true;
            }
            corners[iy * (res + 1) + ix] = v;
        }
    }
    let corner = |ix: usize, iy: usize| corners[iy * (res + 1) + ix];

    // One interpolated point per crossed edge; shared between the two cells
    // adjacent to the edge so chained contours close exactly.
    let mut points: HashMap<EdgeId, (f64, f64)> = HashMap::new();
    let mut interp = |edge: EdgeId, vals: (f64, f64)| -> EdgeId {
        points.entry(edge).or_insert_with(|| {
            let (va, vb) = vals;
            let t = va / (va - vb);
            match edge {
                EdgeId::H(ix, iy) => (coord(ix) + t * step, coord(iy)),
                EdgeId::V(ix, iy) => (coord(ix), coord(iy) + t * step),
            }
        });
        edge
    };

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for iy in 0..res {
        for ix in 0..res {
            let bl = corner(ix, iy);
            let br = corner(ix + 1, iy);
            let tr = corner(ix + 1, iy + 1);
            let tl = corner(ix, iy + 1);
            let mut case = 0u8;
            if bl < 0.0 {
                case |= 1;
            }
            if br < 0.0 {
                case |= 2;
            }
            if tr < 0.0 {
                case |= 4;
            }
            if tl < 0.0 {
                case |= 8;
            }
            if case == 0 || case == 15 {
                continue;
            }
            let bottom = EdgeId::H(ix, iy);
            let top = EdgeId::H(ix, iy + 1);
            let left = EdgeId::V(ix, iy);
            let right = EdgeId::V(ix + 1, iy);
            let mut seg = |a: EdgeId, va: (f64, f64), b: EdgeId, vb: (f64, f64)| {
                let ea = interp(a, va);
                let eb = interp(b, vb);
                segments.push((ea, eb));
            };
            match case {
                1 | 14 => seg(bottom, (bl, br), left, (bl, tl)),
                2 | 13 => seg(right, (br, tr), bottom, (bl, br)),
                3 | 12 => seg(right, (br, tr), left, (bl, tl)),
                4 | 11 => seg(top, (tl, tr), right, (br, tr)),
                6 | 9 => seg(top, (tl, tr), bottom, (bl, br)),
                7 | 8 => seg(left, (bl, tl), top, (tl, tr)),
                5 | 10 => {
                    // Saddle: the center sample picks the separation.
                    let cx = coord(ix) + 0.5 * step;
                    let cy = coord(iy) + 0.5 * step;
                    let center = value(cx, cy);
                    if center.abs() < CONTOUR_DEGENERACY_TOL {
                        near_degenerate = true;
                    }
                    let center_inside = center < 0.0;
                    if (case == 5) == center_inside {
                        seg(bottom, (bl, br), right, (br, tr));
                        seg(top, (tl, tr), left, (bl, tl));
                    } else {
                        seg(bottom, (bl, br), left, (bl, tl));
                        seg(top, (tl, tr), right, (br, tr));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // Chain segments into closed loops by edge identity.
    let mut adjacency: HashMap<EdgeId, Vec<(usize, EdgeId)>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push((i, b));
        adjacency.entry(b).or_default().push((i, a));
    }
    let mut used = vec![false; segments.len()];
    let mut contours = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut current) = segments[start];
        let mut loop_edges = vec![first, current];
        while current != first {
            let next = adjacency
                .get(&current)
                .and_then(|cands| cands.iter().find(|&&(i, _)| !used[i]).copied());
            match next {
                Some((i, other)) => {
                    used[i] = true;
                    loop_edges.push(other);
                    current = other;
                }
                None => break,
            }
        }
        let pts: Vec<(f64, f64)> = loop_edges.iter().map(|e| points[e]).collect();
        if pts.len() >= 4 && loop_edges[0] == *loop_edges.last().unwrap() {
            contours.push(pts);
        }
    }

    Ok(ContourSet {
        contours,
        half_width,
        resolution,
        near_degenerate,
    })
}

/// Optional decorations for [`render_svg`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Overlays<'a> {
    pub roots: Option<&'a [Complex64]>,
    pub critical_points: Option<&'a CriticalSet>,
    /// Radius of a dashed reference circle centered at the origin.
    pub reference_circle: Option<f64>,
}

/// Deterministic SVG bytes for a contour set plus overlays.
pub fn render_svg_string(contours: &ContourSet, overlays: &Overlays<'_>) -> String {
    let hw = contours.half_width;
    let mut out = String::with_capacity(1 << 16);
    // The y flip keeps math coordinates upright in screen space.
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" \
         viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        -hw,
        -hw,
        2.0 * hw,
        2.0 * hw
    ));
    let sw = 0.004 * hw;
    if let Some(r) = overlays.reference_circle {
        out.push_str(&format!(
            "  <circle cx=\"0\" cy=\"0\" r=\"{:.6}\" fill=\"none\" stroke=\"#999999\" \
             stroke-width=\"{:.6}\" stroke-dasharray=\"{:.6} {:.6}\"/>\n",
            r,
            sw,
            4.0 * sw,
            4.0 * sw
        ));
    }
    for contour in &contours.contours {
        out.push_str("  <path d=\"");
        for (i, &(x, y)) in contour.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            out.push_str(&format!("{cmd}{:.6} {:.6} ", x, -y));
        }
        out.push_str(&format!(
            "Z\" fill=\"none\" stroke=\"#202020\" stroke-width=\"{sw:.6}\"/>\n"
        ));
    }
    if let Some(roots) = overlays.roots {
        for root in roots {
            out.push_str(&format!(
                "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"#c03030\"/>\n",
                root.re,
                -root.im,
                1.6 * sw
            ));
        }
    }
    if let Some(cps) = overlays.critical_points {
        for b in &cps.points {
            out.push_str(&format!(
                "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"none\" \
                 stroke=\"#3050c0\" stroke-width=\"{:.6}\"/>\n",
                b.re,
                -b.im,
                1.6 * sw,
                0.6 * sw
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_svg(
    contours: &ContourSet,
    overlays: &Overlays<'_>,
    path: &std::path::Path,
) -> Result<()> {
    std::fs::write(path, render_svg_string(contours, overlays))?;
    Ok(())
}
