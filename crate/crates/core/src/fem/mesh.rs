//! Triangulation of the meridian half-plane around an axisymmetric obstacle.
//!
//! Interior nodes are the leaf centres of a quadtree refined to the size
//! function `h = min(h_max, h_surface + grading·dist)`; boundary nodes are
//! placed along the obstacle, the axis and the outer arc, and the constrained
//! Delaunay triangulation of both is kept outside the obstacle.

use super::{MeshParams, Obstacle};
use crate::error::{Error, Result};
use crate::units::MICRON;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};
use std::f64::consts::PI;

/// Part of the boundary a segment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    /// Ringset surface facing away from the axis.
    Outer,
    /// Ringset surface facing the axis.
    Inner,
    /// Ringset end at `z = +L/2`.
    UpperEnd,
    /// Ringset end at `z = −L/2`.
    LowerEnd,
    Sphere,
    Axis,
    /// Outer boundary of the computational domain.
    Arc,
}

impl Face {
    pub fn is_obstacle(self) -> bool {
        !matches!(self, Face::Axis | Face::Arc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub nodes: [usize; 2],
    pub face: Face,
}

/// Meridian-plane mesh; coordinates are `(ρ, z)` in metres.
#[derive(Debug, Clone)]
pub struct AxiMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundarySegment>,
    pub obstacle: Obstacle,
    pub domain_radius: f64,
    /// Largest element size targeted away from the obstacle (m).
    pub h_max: f64,
}

/// Work in microns so the predicates see O(1) coordinates.
struct Geometry {
    obstacle: Obstacle,
    r_dom: f64,
    h_max: f64,
    h_surf: f64,
    grading: f64,
}

impl Geometry {
    fn ringset(&self) -> Option<(f64, f64, f64)> {
        match self.obstacle {
            Obstacle::Ringset(g) => Some((g.inner_radius / MICRON, g.outer_radius / MICRON, g.length / MICRON / 2.0)),
            Obstacle::Sphere { .. } => None,
        }
    }

    /// Signed distance to the obstacle surface, negative inside.
    fn obstacle_distance(&self, rho: f64, z: f64) -> f64 {
        match self.obstacle {
            Obstacle::Sphere { radius } => (rho * rho + z * z).sqrt() - radius / MICRON,
            Obstacle::Ringset(_) => {
                let (ri, ro, hl) = self.ringset().unwrap();
                let cr = 0.5 * (ri + ro);
                let qx = (rho - cr).abs() - 0.5 * (ro - ri);
                let qz = z.abs() - hl;
                let outside = (qx.max(0.0).powi(2) + qz.max(0.0).powi(2)).sqrt();
                outside + qx.max(qz).min(0.0)
            }
        }
    }

    fn size(&self, dist: f64) -> f64 {
        self.h_max.min(self.h_surf + self.grading * dist.max(0.0))
    }

    /// Refinement toward the outer arc keeps the elements cut by the arc
    /// within the size limit.
    fn arc_size(&self, dist: f64) -> f64 {
        self.h_max.min(0.5 * self.h_max + self.grading * dist.max(0.0))
    }

    fn size_at(&self, rho: f64, z: f64) -> f64 {
        let arc = self.r_dom - rho.hypot(z);
        self.size(self.obstacle_distance(rho, z)).min(self.arc_size(arc))
    }
}

fn graded_line(
    g: &Geometry,
    a: [f64; 2],
    b: [f64; 2],
) -> Vec<[f64; 2]> {
    // Equal increments of ∫ ds/h along the segment.
    let samples = 4096;
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let at = |t: f64| [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t];
    let mut cum = vec![0.0; samples + 1];
    for j in 1..=samples {
        let t = (j as f64 - 0.5) / samples as f64;
        let p = at(t);
        cum[j] = cum[j - 1] + len / samples as f64 / g.size_at(p[0], p[1]);
    }
    let n = cum[samples].ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for m in 0..=n {
        let target = cum[samples] * m as f64 / n as f64;
        while j < samples && cum[j + 1] < target {
            j += 1;
        }
        let t = if m == n {
            1.0
        } else if j >= samples {
            1.0
        } else {
            let span = cum[j + 1] - cum[j];
            let s = if span > 0.0 { (target - cum[j]) / span } else { 0.0 };
            (j as f64 + s) / samples as f64
        };
        out.push(at(t));
    }
    out
}

fn uniform_line(a: [f64; 2], b: [f64; 2], h: f64) -> Vec<[f64; 2]> {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let n = (len / h).ceil().max(1.0) as usize;
    (0..=n)
        .map(|m| {
            let t = m as f64 / n as f64;
            [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
        })
        .collect()
}

fn uniform_arc(radius: f64, h: f64) -> Vec<[f64; 2]> {
    // From (0, R) through (R, 0) to (0, −R).
    let n = (PI * radius / h).ceil().max(2.0) as usize;
    (0..=n)
        .map(|m| {
            let th = PI * m as f64 / n as f64;
            if m == 0 {
                [0.0, radius]
            } else if m == n {
                [0.0, -radius]
            } else {
                [radius * th.sin(), radius * th.cos()]
            }
        })
        .collect()
}

struct Builder {
    points: Vec<[f64; 2]>,
    segments: Vec<BoundarySegment>,
}

impl Builder {
    fn push(&mut self, p: [f64; 2]) -> usize {
        self.points.push(p);
        self.points.len() - 1
    }

    /// Append a chain of points; `first`/`last` reuse existing node indices.
    fn chain(&mut self, pts: &[[f64; 2]], face: Face, first: Option<usize>, last: Option<usize>) -> (usize, usize) {
        let n = pts.len();
        let mut idx = Vec::with_capacity(n);
        for (m, p) in pts.iter().enumerate() {
            let reuse = if m == 0 { first } else if m == n - 1 { last } else { None };
            idx.push(reuse.unwrap_or_else(|| self.push(*p)));
        }
        for w in idx.windows(2) {
            self.segments.push(BoundarySegment { nodes: [w[0], w[1]], face });
        }
        (idx[0], idx[n - 1])
    }
}

fn quadtree_points(g: &Geometry) -> Vec<[f64; 2]> {
    let mut side = g.h_max;
    while side < g.r_dom {
        side *= 2.0;
    }
    let mut stack = vec![(0.0, 0.0, side), (0.0, -side, side)];
    let mut out = Vec::new();
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    while let Some((x0, z0, s)) = stack.pop() {
        let (cx, cz) = (x0 + 0.5 * s, z0 + 0.5 * s);
        // Nearest point of the cell to the origin.
        let nx = 0f64.clamp(x0, x0 + s);
        let nz = 0f64.clamp(z0, z0 + s);
        if (nx * nx + nz * nz).sqrt() >= g.r_dom {
            continue;
        }
        let d = g.obstacle_distance(cx, cz);
        if d < -s * diag {
            continue;
        }
        let far = g.r_dom - cx.hypot(cz);
        let h = g.size(d - s * diag).min(g.arc_size(far - s * diag));
        if s > h * (1.0 + 1e-9) {
            let hs = 0.5 * s;
            stack.extend_from_slice(&[(x0, z0, hs), (x0 + hs, z0, hs), (x0, z0 + hs, hs), (x0 + hs, z0 + hs, hs)]);
            continue;
        }
        let keep = d >= 0.45 * s && g.r_dom - (cx * cx + cz * cz).sqrt() >= 0.45 * s && cx >= 0.45 * s;
        if keep {
            out.push([cx, cz]);
        }
    }
    // The stack order depends only on the inputs; sort anyway so the node
    // numbering is independent of traversal details.
    out.sort_by(|a, b| a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0])));
    out
}

impl AxiMesh {
    pub fn build(obstacle: &Obstacle, params: &MeshParams, wavelength: f64) -> Result<Self> {
        obstacle.validate()?;
        params.validate()?;
        let extent = obstacle.extent();
        if params.domain_radius <= 2.0 * extent {
            return Err(Error::Mesh(format!(
                "domain radius {:.3e} m must exceed twice the obstacle extent {:.3e} m",
                params.domain_radius, extent
            )));
        }
        let h_max = params.h_max.min(wavelength / params.elements_per_wavelength);
        let g = Geometry {
            obstacle: *obstacle,
            r_dom: params.domain_radius / MICRON,
            h_max: h_max / MICRON,
            h_surf: (params.h_surface / MICRON).min(h_max / MICRON),
            grading: params.grading,
        };
        let mut b = Builder { points: Vec::new(), segments: Vec::new() };

        let arc = uniform_arc(g.r_dom, 0.5 * g.h_max);
        let (top, bottom) = b.chain(&arc, Face::Arc, None, None);
        match *obstacle {
            Obstacle::Ringset(_) => {
                let (ri, ro, hl) = g.ringset().unwrap();
                let hs = g.h_surf;
                let c0 = b.push([ri, -hl]);
                let c1 = b.push([ro, -hl]);
                let c2 = b.push([ro, hl]);
                let c3 = b.push([ri, hl]);
                b.chain(&uniform_line([ri, -hl], [ro, -hl], hs), Face::LowerEnd, Some(c0), Some(c1));
                b.chain(&uniform_line([ro, -hl], [ro, hl], hs), Face::Outer, Some(c1), Some(c2));
                b.chain(&uniform_line([ro, hl], [ri, hl], hs), Face::UpperEnd, Some(c2), Some(c3));
                b.chain(&uniform_line([ri, hl], [ri, -hl], hs), Face::Inner, Some(c3), Some(c0));
                let axis = graded_line(&g, [0.0, -g.r_dom], [0.0, g.r_dom]);
                b.chain(&axis, Face::Axis, Some(bottom), Some(top));
            }
            Obstacle::Sphere { radius } => {
                let a = radius / MICRON;
                let sph = uniform_arc(a, g.h_surf);
                let (north, south) = b.chain(&sph, Face::Sphere, None, None);
                b.chain(&graded_line(&g, [0.0, a], [0.0, g.r_dom]), Face::Axis, Some(north), Some(top));
                b.chain(&graded_line(&g, [0.0, -g.r_dom], [0.0, -a]), Face::Axis, Some(bottom), Some(south));
            }
        }
        let n_boundary = b.points.len();
        b.points.extend(quadtree_points(&g));

        let vertices: Vec<Point2<f64>> = b.points.iter().map(|p| Point2::new(p[0], p[1])).collect();
        let edges: Vec<[usize; 2]> = b.segments.iter().map(|s| s.nodes).collect();
        let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
            .map_err(|e| Error::Mesh(format!("triangulation failed: {e:?}")))?;
        if cdt.num_vertices() != b.points.len() {
            return Err(Error::Mesh(format!(
                "triangulation merged {} coincident nodes",
                b.points.len() - cdt.num_vertices()
            )));
        }
        for (j, v) in cdt.vertices().enumerate() {
            let p = v.position();
            if v.fix().index() != j || p.x != b.points[j][0] || p.y != b.points[j][1] {
                return Err(Error::Mesh("triangulation reordered the input nodes".into()));
            }
        }
        let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
        for f in cdt.inner_faces() {
            let v = f.vertices().map(|h| h.fix().index());
            let p = v.map(|i| b.points[i]);
            let (cx, cz) = ((p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0);
            if cx <= 0.0 || cx * cx + cz * cz >= g.r_dom * g.r_dom || g.obstacle_distance(cx, cz) <= 0.0 {
                continue;
            }
            let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            triangles.push(if area2 > 0.0 { v } else { [v[0], v[2], v[1]] });
        }
        let nodes = b.points.iter().map(|p| [p[0] * MICRON, p[1] * MICRON]).collect();
        let mesh = AxiMesh {
            nodes,
            triangles,
            boundary: b.segments,
            obstacle: *obstacle,
            domain_radius: params.domain_radius,
            h_max,
        };
        mesh.check(n_boundary)?;
        let per_wavelength = wavelength / mesh.max_element_size();
        if per_wavelength < params.elements_per_wavelength * (1.0 - 1e-6) {
            return Err(Error::Mesh(format!(
                "mesh resolves only {per_wavelength:.1} elements per wavelength (need {})",
                params.elements_per_wavelength
            )));
        }
        Ok(mesh)
    }

    fn check(&self, n_boundary: usize) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::Mesh("no elements inside the domain".into()));
        }
        let mut used = vec![false; self.nodes.len()];
        for t in &self.triangles {
            for &i in t {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            let kind = if i < n_boundary { "boundary" } else { "interior" };
            return Err(Error::Mesh(format!("{kind} node {i} is not part of any element")));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    /// Element size `√(2A)`: the leg of a right isosceles triangle of equal area.
    pub fn max_element_size(&self) -> f64 {
        (0..self.triangles.len()).map(|t| (2.0 * self.area(t)).sqrt()).fold(0.0, f64::max)
    }

    pub fn segments_on(&self, pred: impl Fn(Face) -> bool) -> impl Iterator<Item = &BoundarySegment> {
        self.boundary.iter().filter(move |s| pred(s.face))
    }

    /// Number of segments on the obstacle surface.
    pub fn obstacle_segments(&self) -> usize {
        self.segments_on(Face::is_obstacle).count()
    }

    pub fn segment_length(&self, s: &BoundarySegment) -> f64 {
        let [a, b] = s.nodes.map(|i| self.nodes[i]);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Largest obstacle segment length (m).
    pub fn max_obstacle_segment(&self) -> f64 {
        self.segments_on(Face::is_obstacle).map(|s| self.segment_length(s)).fold(0.0, f64::max)
    }

    /// Smallest interior angle over all elements, degrees.
    pub fn min_angle(&self) -> f64 {
        let mut worst = 180.0f64;
        for t in &self.triangles {
            let p = t.map(|i| self.nodes[i]);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0].hypot(u[1])) * (v[0].hypot(v[1])));
                worst = worst.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        worst
    }

    /// Content hash of node coordinates and connectivity.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.nodes {
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        }
        for t in &self.triangles {
            for &i in t {
                h.update((i as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
