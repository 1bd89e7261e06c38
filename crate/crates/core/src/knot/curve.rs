//! Closed polygonal curves built from tree paths.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Segment};
use crate::graph::EmbeddedGraph;

pub const EMBED_TOL: f64 = 1e-9;
pub const COLLINEAR_TOL: f64 = 1e-9;
pub const APEX: Point3 = Point3::new(0.0, 0.0, 3.0);

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalCurve {
    vertices: Vec<Point3>,
}

/// Distance between two segments.
pub fn segment_distance(s: &Segment, t: &Segment) -> f64 {
    let d1 = s.b - s.a;
    let d2 = t.b - t.a;
    let r = s.a - t.a;
    let (a, e, f) = (d1.norm_sq(), d2.norm_sq(), d2.dot(r));
    let (mut u, mut v);
    if a <= 1e-300 && e <= 1e-300 {
        return s.a.dist(t.a);
    }
    if a <= 1e-300 {
        u = 0.0;
        v = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= 1e-300 {
            v = 0.0;
            u = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            u = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            v = (b * u + f) / e;
            if v < 0.0 {
                v = 0.0;
                u = (-c / a).clamp(0.0, 1.0);
            } else if v > 1.0 {
                v = 1.0;
                u = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    (s.a + d1 * u).dist(t.a + d2 * v)
}

impl PolygonalCurve {
    /// Validates distinct consecutive vertices and that non-adjacent
    /// segments stay at least `EMBED_TOL` apart.
    pub fn new(vertices: Vec<Point3>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Degenerate(format!("closed curve needs 3 vertices, got {n}")));
        }
        for i in 0..n {
            if vertices[i].dist(vertices[(i + 1) % n]) <= EMBED_TOL {
                return Err(Error::Degenerate(format!("curve vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        let c = PolygonalCurve { vertices };
        let segs = c.segments();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segment_distance(&segs[i], &segs[j]) < EMBED_TOL {
                    return Err(Error::Degenerate(format!("curve segments {i} and {j} intersect")));
                }
            }
        }
        Ok(c)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segments(&self) -> Vec<Segment> {
        let n = self.vertices.len();
        (0..n).map(|i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n])).collect()
    }

    /// Drops vertices lying on the line through their neighbours.
    pub fn simplified(&self) -> PolygonalCurve {
        let mut v = self.vertices.clone();
        loop {
            let n = v.len();
            if n <= 3 {
                break;
            }
            let drop = (0..n).find(|&i| {
                let s = Segment::new(v[(i + n - 1) % n], v[(i + 1) % n]);
                let along = (v[i] - s.a).dot(s.b - s.a);
                along > 0.0 && along < (s.b - s.a).norm_sq() && s.distance_to(v[i]) < COLLINEAR_TOL
            });
            match drop {
                Some(i) => {
                    v.remove(i);
                }
                None => break,
            }
        }
        PolygonalCurve { vertices: v }
    }

    /// Sampled closed parametric curve (for fixtures).
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Point3) -> Result<Self> {
        let pts = (0..n).map(|i| f(2.0 * std::f64::consts::PI * i as f64 / n as f64)).collect();
        PolygonalCurve::new(pts)
    }
}

/// Vertex ids along the tree path between two distinct leaves.
pub fn leaf_path(g: &EmbeddedGraph, p: usize, q: usize) -> Result<Vec<usize>> {
    if !g.is_tree() {
        return Err(Error::InvalidGraph("leaf paths need a tree".into()));
    }
    for v in [p, q] {
        if v >= g.vertices.len() || g.degree(v) != 1 {
            return Err(Error::InvalidGraph(format!("vertex {v} is not a leaf")));
        }
    }
    if p == q {
        return Err(Error::InvalidGraph("leaf path needs two distinct leaves".into()));
    }
    g.path(p, q).ok_or_else(|| Error::InvalidGraph("leaves are not connected".into()))
}

/// Radius of the sphere carrying the closing arc.
pub const CLOSURE_RADIUS: f64 = 3.0;
/// Largest angle between consecutive closing-arc vertices.
const CLOSURE_STEP: f64 = std::f64::consts::PI / 6.0;

/// Points of the great-circle arc of radius `CLOSURE_RADIUS` from the
/// direction `a` to `b`, excluding the start.
fn outer_arc(a: Point3, b: Point3) -> Vec<Point3> {
    let angle = a.dot(b).clamp(-1.0, 1.0).acos();
    if angle < 1e-15 {
        return vec![];
    }
    let axis = a.cross(b).normalized().unwrap_or_else(|| a.any_orthonormal());
    let steps = (angle / CLOSURE_STEP).ceil() as usize;
    (1..=steps)
        .map(|k| {
            if k == steps {
                b * CLOSURE_RADIUS
            } else {
                a.rotate(axis, angle * k as f64 / steps as f64) * CLOSURE_RADIUS
            }
        })
        .collect()
}

/// Closes an open path whose ends p, q lie on the unit sphere: radially
/// out from q to radius 3, along great circles of that sphere through
/// (0,0,3) to the point above p, and radially back in to p.
pub fn exterior_closure(path: &[Point3]) -> Result<PolygonalCurve> {
    let (Some(&p), Some(&q)) = (path.first(), path.last()) else {
        return Err(Error::Empty("closure path"));
    };
    for e in [p, q] {
        if (e.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::OutOfRange(format!("path end {e:?} is not on the unit sphere")));
        }
    }
    let (pu, qu) = (p / p.norm(), q / q.norm());
    let top = APEX / CLOSURE_RADIUS;
    let mut v = path.to_vec();
    v.push(qu * CLOSURE_RADIUS);
    v.extend(outer_arc(qu, top));
    let mut back = outer_arc(top, pu);
    // The point above p is reached by the radial segment from p itself.
    if back.is_empty() {
        v.pop();
        v.push(pu * CLOSURE_RADIUS);
    } else {
        v.append(&mut back);
    }
    PolygonalCurve::new(v)
}

/// Largest distance of the vertices from their best-fit plane.
pub fn coplanarity_defect(points: &[Point3]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    let c = points.iter().copied().sum::<Point3>() / points.len() as f64;
    let mut m = Matrix3::zeros();
    for p in points {
        let d = *p - c;
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        m += v * v.transpose();
    }
    let eig = SymmetricEigen::new(m);
    let k = eig.eigenvalues.imin();
    let n = eig.eigenvectors.column(k);
    let n = Point3::new(n[0], n[1], n[2]);
    points.iter().map(|p| (*p - c).dot(n).abs()).fold(0.0, f64::max)
}
