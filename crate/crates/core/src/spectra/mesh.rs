//! Graded Delaunay meshes of the upper half unit disk.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, PositionInTriangulation, Triangulation};

use crate::error::{Error, Result};
use crate::theta::ThetaParam;

/// Size ratio between consecutive grading layers.
pub const GRADING_RATIO: f64 = 0.7;
/// Number of grading layers below the base size.
pub const GRADING_DEPTH: i32 = 8;
/// Default boundary edge target length.
pub const DEFAULT_H: f64 = 0.02;
/// Minimum number of boundary segments on the middle arc.
pub const MIN_ARC_SEGMENTS: usize = 8;

const MAX_VERTICES: usize = 2_000_000;

/// The four boundary pieces of the half disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryArc {
    /// Real segment (0, 1).
    Gamma1,
    /// Real segment (−1, 0).
    Gamma2,
    /// Unit-circle arcs away from the imaginary axis.
    Gamma3,
    /// Unit-circle arc around `i` between the split points.
    Gamma4,
}

impl BoundaryArc {
    pub const ALL: [BoundaryArc; 4] =
        [BoundaryArc::Gamma1, BoundaryArc::Gamma2, BoundaryArc::Gamma3, BoundaryArc::Gamma4];

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mesh {
    pub theta: f64,
    pub h: f64,
    pub grading: bool,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<([usize; 2], BoundaryArc)>,
    /// Bitmask of the closed arcs each vertex lies on.
    pub vertex_arcs: Vec<u8>,
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// `∫ 4/(1+|z|²)²` by the three-midpoint rule.
    pub fn weighted_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
                let q = midpoint_weights(a, b, c);
                self.triangle_area(t) * (q[0] + q[1] + q[2]) / 3.0
            })
            .sum()
    }

    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                let p = t.map(|i| self.vertices[i]);
                [dist(p[0], p[1]), dist(p[1], p[2]), dist(p[2], p[0])]
            })
            .fold(0.0, f64::max)
    }

    pub fn boundary_length(&self, arc: BoundaryArc) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|(_, a)| *a == arc)
            .map(|([i, j], _)| dist(self.vertices[*i], self.vertices[*j]))
            .sum()
    }

    pub fn segments_on(&self, arc: BoundaryArc) -> usize {
        self.boundary_edges.iter().filter(|(_, a)| *a == arc).count()
    }
}

/// Conformal weight `4/(1+|z|²)²` at the three edge midpoints.
pub(crate) fn midpoint_weights(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 3] {
    let w = |p: [f64; 2], q: [f64; 2]| {
        let x = 0.5 * (p[0] + q[0]);
        let y = 0.5 * (p[1] + q[1]);
        let r = 1.0 + x * x + y * y;
        4.0 / (r * r)
    };
    [w(a, b), w(b, c), w(c, a)]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Points where the boundary condition may switch or the boundary has a corner.
pub fn transition_points(theta: f64) -> [[f64; 2]; 5] {
    let (a, b) = (FRAC_PI_2 - theta, FRAC_PI_2 + theta);
    [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [a.cos(), a.sin()], [b.cos(), b.sin()]]
}

struct SizeField {
    h: f64,
    hmin: f64,
    slope: f64,
    points: Vec<[f64; 2]>,
}

impl SizeField {
    fn new(theta: f64, h: f64, grading: bool) -> Self {
        let points = if grading { transition_points(theta).to_vec() } else { Vec::new() };
        SizeField {
            h,
            hmin: h * GRADING_RATIO.powi(GRADING_DEPTH),
            slope: 1.0 - GRADING_RATIO,
            points,
        }
    }

    fn at(&self, p: [f64; 2]) -> f64 {
        let d = self.points.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min);
        (self.slope * d).clamp(self.hmin, self.h)
    }
}

/// Places points along a parametrized boundary piece so that spacing follows
/// the size field; both endpoints are included.
fn discretize<F: Fn(f64) -> [f64; 2]>(curve: F, length: f64, size: &SizeField) -> Vec<[f64; 2]> {
    let samples = ((length / size.hmin) * 20.0).ceil().max(200.0) as usize;
    let dt = 1.0 / samples as f64;
    let mut cum = vec![0.0; samples + 1];
    for k in 0..samples {
        let mid = curve((k as f64 + 0.5) * dt);
        cum[k + 1] = cum[k] + length * dt / size.at(mid);
    }
    let total = cum[samples];
    let n = total.ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(curve(0.0));
    let mut k = 0;
    for m in 1..n {
        let target = total * m as f64 / n as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
        out.push(curve((k as f64 + frac) * dt));
    }
    out.push(curve(1.0));
    out
}

/// Builds a triangulation of `{|z| < 1, Im z > 0}` with vertices at the
/// split points `e^{i(π/2±θ)}`, `±1` and `0`, optionally graded toward them.
pub fn mesh_fundamental_domain(theta: &ThetaParam, h: f64, grading: bool) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("mesh size must be positive, got {h}")));
    }
    let th = theta.theta();
    let size = SizeField::new(th, h, grading);
    let (a, b) = (FRAC_PI_2 - th, FRAC_PI_2 + th);
    let arc = |t0: f64, t1: f64| move |s: f64| {
        let t = t0 + (t1 - t0) * s;
        [t.cos(), t.sin()]
    };
    let seg = |x0: f64, x1: f64| move |s: f64| [x0 + (x1 - x0) * s, 0.0];

    // Boundary pieces in counterclockwise order, each tagged with its arc.
    let pieces: Vec<(Vec<[f64; 2]>, BoundaryArc)> = vec![
        (discretize(seg(0.0, 1.0), 1.0, &size), BoundaryArc::Gamma1),
        (discretize(arc(0.0, a), a, &size), BoundaryArc::Gamma3),
        (discretize(arc(a, b), b - a, &size), BoundaryArc::Gamma4),
        (discretize(arc(b, PI), PI - b, &size), BoundaryArc::Gamma3),
        (discretize(seg(-1.0, 0.0), 1.0, &size), BoundaryArc::Gamma2),
    ];
    let arc_segments = pieces[2].0.len() - 1;
    if arc_segments < MIN_ARC_SEGMENTS {
        return Err(Error::Mesh(format!(
            "h = {h} resolves the middle arc with only {arc_segments} segments (need {MIN_ARC_SEGMENTS})"
        )));
    }

    let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut boundary: Vec<([usize; 2], BoundaryArc)> = Vec::new();
    let mut first: Option<usize> = None;
    let mut prev: Option<usize> = None;
    for (pts, tag) in &pieces {
        for (k, p) in pts.iter().enumerate() {
            let closes_loop = k + 1 == pts.len() && *tag == BoundaryArc::Gamma2;
            let idx = match prev {
                Some(i) if k == 0 => i,
                _ if closes_loop => first.expect("first piece inserted"),
                _ => insert(&mut dt, *p)?,
            };
            if first.is_none() {
                first = Some(idx);
            }
            if k > 0 {
                boundary.push(([prev.expect("previous vertex"), idx], *tag));
            }
            prev = Some(idx);
        }
    }

    refine(&mut dt, &size)?;

    let vertices: Vec<[f64; 2]> = dt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let triangles: Vec<[usize; 3]> = dt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .filter(|t| {
            let p = t.map(|i| vertices[i]);
            ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs() > 1e-300
        })
        .collect();
    let mut vertex_arcs = vec![0u8; vertices.len()];
    for ([i, j], tag) in &boundary {
        vertex_arcs[*i] |= tag.bit();
        vertex_arcs[*j] |= tag.bit();
    }
    Ok(Mesh { theta: th, h, grading, vertices, triangles, boundary_edges: boundary, vertex_arcs })
}

fn insert(dt: &mut DelaunayTriangulation<Point2<f64>>, p: [f64; 2]) -> Result<usize> {
    dt.insert(Point2::new(p[0], p[1]))
        .map(|v| v.index())
        .map_err(|e| Error::Mesh(format!("vertex insertion failed at {p:?}: {e:?}")))
}

/// Inserts circumcenters (or centroids, when the circumcenter leaves the
/// domain) of triangles whose longest edge exceeds the local size.
fn refine(dt: &mut DelaunayTriangulation<Point2<f64>>, size: &SizeField) -> Result<()> {
    loop {
        let mut candidates: Vec<[f64; 2]> = Vec::new();
        for f in dt.inner_faces() {
            let p = f.positions().map(|q| [q.x, q.y]);
            let longest = dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]));
            let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
            if longest > size.at(c) {
                let cc = f.circumcenter();
                candidates.push([cc.x, cc.y]);
                candidates.push(c);
            }
        }
        if candidates.is_empty() {
            return Ok(());
        }
        let mut inserted = 0;
        for pair in candidates.chunks(2) {
            let (cc, centroid) = (pair[0], pair[1]);
            let target = match dt.locate(Point2::new(cc[0], cc[1])) {
                PositionInTriangulation::OnFace(_) => cc,
                _ => centroid,
            };
            let local = size.at(target);
            let near = dt
                .nearest_neighbor(Point2::new(target[0], target[1]))
                .map(|v| dist([v.position().x, v.position().y], target))
                .unwrap_or(f64::INFINITY);
            if near < 0.5 * local {
                continue;
            }
            insert(dt, target)?;
            inserted += 1;
        }
        if inserted == 0 {
            return Ok(());
        }
        if dt.num_vertices() > MAX_VERTICES {
            return Err(Error::Mesh(format!("refinement exceeded {MAX_VERTICES} vertices")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(th: f64, h: f64) -> Mesh {
        mesh_fundamental_domain(&ThetaParam::new(th).unwrap(), h, true).unwrap()
    }

    #[test]
    fn area_converges_to_half_disk() {
        let e1 = (mesh(0.6, 0.08).area() - FRAC_PI_2).abs();
        let e2 = (mesh(0.6, 0.04).area() - FRAC_PI_2).abs();
        assert!(e2 < e1 && e2 < 1e-3, "{e1} {e2}");
    }

    #[test]
    fn weighted_area_is_quarter_sphere() {
        let m = mesh(0.4, 0.04);
        assert!((m.weighted_area() - PI).abs() < 2e-3, "{}", m.weighted_area());
    }

    #[test]
    fn markers_partition_boundary() {
        let m = mesh(0.7, 0.05);
        let total: f64 = BoundaryArc::ALL.iter().map(|&a| m.boundary_length(a)).sum();
        assert!((total - (2.0 + PI)).abs() < 1e-2);
        assert!((m.boundary_length(BoundaryArc::Gamma4) - 1.4).abs() < 1e-2);
        // Every boundary vertex appears in the closure of at least one arc, and
        // transition points in two.
        for p in transition_points(0.7) {
            let i = m.vertices.iter().position(|v| dist(*v, p) < 1e-14).expect("vertex present");
            assert_eq!(m.vertex_arcs[i].count_ones(), 2, "{p:?}");
        }
    }

    #[test]
    fn respects_size_bound() {
        let m = mesh(0.3, 0.05);
        assert!(m.max_edge() <= 0.05 * 1.05, "{}", m.max_edge());
    }

    #[test]
    fn too_coarse_is_rejected() {
        let t = ThetaParam::new(0.05).unwrap();
        assert!(matches!(mesh_fundamental_domain(&t, 0.5, false), Err(Error::Mesh(_))));
    }
}
