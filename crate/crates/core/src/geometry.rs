//! Geometric primitives: points, spherical coordinates, circles, sphere
//! arcs, the closed-form three-point minimal tree and a few distance
//! helpers used as oracles elsewhere.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EmbeddedGraph, Role};

pub const TWO_PI_OVER_3: f64 = 2.0 * PI / 3.0;

/// Default tolerance for geometric assertions.
pub const GEOM_TOL: f64 = 1e-9;
/// Default tolerance for convergence residuals.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction; `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 1e-300).then(|| self / n)
    }

    pub fn approx_eq(self, o: Point3, tol: f64) -> bool {
        self.dist(o) <= tol
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Point3, t: f64) -> Point3 {
        self + (o - self) * t
    }

    /// Any unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthonormal(self) -> Point3 {
        let a = if self.x.abs() < 0.6 {
            Point3::new(1.0, 0.0, 0.0)
        } else if self.y.abs() < 0.6 {
            Point3::new(0.0, 1.0, 0.0)
        } else {
            Point3::new(0.0, 0.0, 1.0)
        };
        let u = a - self * (a.dot(self) / self.norm_sq());
        u.normalized().expect("nonzero input")
    }

    /// Rotation about the unit `axis` by `angle` (Rodrigues).
    pub fn rotate(self, axis: Point3, angle: f64) -> Point3 {
        let (s, c) = angle.sin_cos();
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.9}, {:.9}, {:.9})", self.x, self.y, self.z)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Point3 {
    fn add_assign(&mut self, o: Point3) {
        *self = *self + o;
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Point3 {
    fn sub_assign(&mut self, o: Point3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Point3 {
    type Output = Point3;
    fn div(self, s: f64) -> Point3 {
        Point3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

impl std::iter::Sum for Point3 {
    fn sum<I: Iterator<Item = Point3>>(iter: I) -> Point3 {
        iter.fold(Point3::ORIGIN, |a, b| a + b)
    }
}

/// `(r, theta, phi)` with theta the azimuth and phi the polar angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCoord {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalCoord {
    pub const fn new(r: f64, theta: f64, phi: f64) -> Self {
        SphericalCoord { r, theta, phi }
    }

    pub const fn unit(theta: f64, phi: f64) -> Self {
        SphericalCoord { r: 1.0, theta, phi }
    }

    pub fn to_cartesian(self) -> Point3 {
        spherical_to_cartesian(self)
    }

    /// Inverse conversion; theta in (-pi, pi], phi in [0, pi].
    pub fn from_cartesian(p: Point3) -> Self {
        let r = p.norm();
        if r == 0.0 {
            return SphericalCoord::new(0.0, 0.0, 0.0);
        }
        let phi = (p.z / r).clamp(-1.0, 1.0).acos();
        let theta = p.y.atan2(p.x);
        SphericalCoord::new(r, theta, phi)
    }
}

pub fn spherical_to_cartesian(c: SphericalCoord) -> Point3 {
    let (st, ct) = c.theta.sin_cos();
    let (sp, cp) = c.phi.sin_cos();
    Point3::new(c.r * sp * ct, c.r * sp * st, c.r * cp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point3,
    pub b: Point3,
}

impl Segment {
    pub fn new(a: Point3, b: Point3) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn closest_point(&self, p: Point3) -> Point3 {
        let d = self.b - self.a;
        let l2 = d.norm_sq();
        if l2 == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(d) / l2).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance_to(&self, p: Point3) -> f64 {
        self.closest_point(p).dist(p)
    }

    /// `n + 1` evenly spaced points including both endpoints.
    pub fn sample(&self, n: usize) -> Vec<Point3> {
        let n = n.max(1);
        (0..=n).map(|i| self.a.lerp(self.b, i as f64 / n as f64)).collect()
    }
}

/// A circle with explicit center, radius and unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle3 {
    pub center: Point3,
    pub radius: f64,
    pub normal: Point3,
    u: Point3,
    v: Point3,
}

impl Circle3 {
    pub fn new(center: Point3, radius: f64, normal: Point3) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::OutOfRange(format!("circle radius {radius}")));
        }
        let normal = normal
            .normalized()
            .ok_or_else(|| Error::Degenerate("zero circle normal".into()))?;
        // Horizontal circles get u = +x, v = +y so that the parameter is the
        // usual azimuth theta.
        let u = if (normal.z.abs() - 1.0).abs() < 1e-15 {
            Point3::new(1.0, 0.0, 0.0)
        } else {
            normal.any_orthonormal()
        };
        let v = normal.cross(u);
        Ok(Circle3 { center, radius, normal, u, v })
    }

    /// The equator `Q` of the unit sphere.
    pub fn equator() -> Self {
        Circle3::horizontal(0.0)
    }

    /// The circle of the unit sphere at height `z`.
    pub fn horizontal(z: f64) -> Self {
        let r = (1.0 - z * z).max(0.0).sqrt();
        Circle3::new(Point3::new(0.0, 0.0, z), r, Point3::new(0.0, 0.0, 1.0))
            .expect("valid horizontal circle")
    }

    pub fn point_at(&self, t: f64) -> Point3 {
        let (s, c) = t.sin_cos();
        self.center + (self.u * c + self.v * s) * self.radius
    }

    pub fn tangent_at(&self, t: f64) -> Point3 {
        let (s, c) = t.sin_cos();
        (self.v * c - self.u * s) * self.radius
    }

    pub fn second_derivative_at(&self, t: f64) -> Point3 {
        let (s, c) = t.sin_cos();
        (self.u * c + self.v * s) * (-self.radius)
    }

    /// Parameter of the nearest point, or `None` when `p` lies on the axis.
    pub fn closest_param(&self, p: Point3) -> Option<f64> {
        let d = p - self.center;
        let inplane = d - self.normal * d.dot(self.normal);
        if inplane.norm() < 1e-12 {
            return None;
        }
        Some(inplane.dot(self.v).atan2(inplane.dot(self.u)))
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }

    pub fn sample(&self, n: usize) -> Vec<Point3> {
        let n = n.max(3);
        (0..n)
            .map(|i| self.point_at(2.0 * PI * i as f64 / n as f64))
            .collect()
    }
}

pub fn closest_point_on_circle(p: Point3, c: &Circle3) -> Result<Point3> {
    c.closest_param(p)
        .map(|t| c.point_at(t))
        .ok_or_else(|| Error::Nonunique(format!("{p} lies on the circle axis")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    /// Shortest great-circle arc between the endpoints.
    GreatCircle,
    /// Arc of the circle of latitude through both endpoints (equal phi).
    ConstantPhi,
}

/// An arc on the unit sphere, parameterized by arclength from `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereArc {
    pub start: SphericalCoord,
    pub end: SphericalCoord,
    pub kind: ArcKind,
    /// For constant-phi arcs: +1 when theta increases from start to end.
    pub orientation: i8,
    // Great circle: rotation axis and swept angle. Constant phi: signed sweep
    // in theta.
    axis: Point3,
    sweep: f64,
}

impl SphereArc {
    pub fn great_circle(start: SphericalCoord, end: SphericalCoord) -> Result<Self> {
        check_unit(start)?;
        check_unit(end)?;
        let (a, b) = (start.to_cartesian(), end.to_cartesian());
        let axis = a
            .cross(b)
            .normalized()
            .ok_or_else(|| Error::Degenerate("great-circle arc endpoints equal or antipodal".into()))?;
        let sweep = a.cross(b).norm().atan2(a.dot(b));
        Ok(SphereArc { start, end, kind: ArcKind::GreatCircle, orientation: 1, axis, sweep })
    }

    /// Constant-phi arc sweeping theta from `start.theta` to `end.theta`
    /// exactly as given (the sign of the difference is the orientation).
    pub fn constant_phi(start: SphericalCoord, end: SphericalCoord) -> Result<Self> {
        check_unit(start)?;
        check_unit(end)?;
        if (start.phi - end.phi).abs() > 1e-15 {
            return Err(Error::Degenerate("constant-phi arc endpoints differ in phi".into()));
        }
        let sweep = end.theta - start.theta;
        if sweep == 0.0 || start.phi.sin() <= 0.0 {
            return Err(Error::Degenerate("zero-length constant-phi arc".into()));
        }
        Ok(SphereArc {
            start,
            end,
            kind: ArcKind::ConstantPhi,
            orientation: if sweep > 0.0 { 1 } else { -1 },
            axis: Point3::new(0.0, 0.0, 1.0),
            sweep,
        })
    }

    pub fn length(&self) -> f64 {
        match self.kind {
            ArcKind::GreatCircle => self.sweep,
            ArcKind::ConstantPhi => self.sweep.abs() * self.start.phi.sin(),
        }
    }

    fn latitude_radius(&self) -> f64 {
        self.start.phi.sin()
    }

    pub fn point_at(&self, s: f64) -> Point3 {
        match self.kind {
            ArcKind::GreatCircle => self.start.to_cartesian().rotate(self.axis, s),
            ArcKind::ConstantPhi => {
                let theta = self.start.theta + self.orientation as f64 * s / self.latitude_radius();
                SphericalCoord::unit(theta, self.start.phi).to_cartesian()
            }
        }
    }

    pub fn tangent_at(&self, s: f64) -> Point3 {
        match self.kind {
            ArcKind::GreatCircle => self.axis.cross(self.point_at(s)),
            ArcKind::ConstantPhi => {
                let theta = self.start.theta + self.orientation as f64 * s / self.latitude_radius();
                Point3::new(-theta.sin(), theta.cos(), 0.0) * self.orientation as f64
            }
        }
    }

    pub fn second_derivative_at(&self, s: f64) -> Point3 {
        match self.kind {
            ArcKind::GreatCircle => -self.point_at(s),
            ArcKind::ConstantPhi => {
                let p = self.point_at(s);
                -Point3::new(p.x, p.y, 0.0) / (self.latitude_radius() * self.latitude_radius())
            }
        }
    }

    /// Arclength parameter of the point of the arc nearest to `p`.
    pub fn closest_param(&self, p: Point3) -> f64 {
        let len = self.length();
        let (candidate, circle_r) = match self.kind {
            ArcKind::GreatCircle => {
                let a = self.start.to_cartesian();
                let b = self.axis.cross(a);
                let q = p - self.axis * p.dot(self.axis);
                if q.norm() < 1e-14 {
                    (None, 1.0)
                } else {
                    let ang = q.dot(b).atan2(q.dot(a));
                    (Some(ang), 1.0)
                }
            }
            ArcKind::ConstantPhi => {
                let r = self.latitude_radius();
                if (p.x * p.x + p.y * p.y).sqrt() < 1e-14 {
                    (None, r)
                } else {
                    let th = p.y.atan2(p.x);
                    let rel = (th - self.start.theta) * self.orientation as f64;
                    (Some(rel), r)
                }
            }
        };
        let mut best = (self.point_at(0.0).dist(p), 0.0);
        let end = (self.point_at(len).dist(p), len);
        if end.0 < best.0 {
            best = end;
        }
        if let Some(ang) = candidate {
            let ang = ang.rem_euclid(2.0 * PI);
            let s = ang * circle_r;
            if s <= len {
                let d = self.point_at(s).dist(p);
                if d < best.0 {
                    best = (d, s);
                }
            }
        }
        best.1
    }

    pub fn sample(&self, n: usize) -> Vec<Point3> {
        let n = n.max(1);
        let len = self.length();
        (0..=n).map(|i| self.point_at(len * i as f64 / n as f64)).collect()
    }
}

fn check_unit(c: SphericalCoord) -> Result<()> {
    if (c.r - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfRange(format!("sphere arc endpoint radius {}", c.r)));
    }
    Ok(())
}

/// Angle at `q` between the arms towards `p` and `r`, in `[0, pi]`.
pub fn angle_at(p: Point3, q: Point3, r: Point3) -> Result<f64> {
    let u = p - q;
    let v = r - q;
    if u.norm() < 1e-12 || v.norm() < 1e-12 {
        return Err(Error::Degenerate("angle arm shorter than 1e-12".into()));
    }
    Ok(u.cross(v).norm().atan2(u.dot(v)))
}

/// Symmetric Hausdorff distance between two finite samples.
pub fn hausdorff_distance(a: &[Point3], b: &[Point3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("hausdorff_distance sample set"));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

fn directed_hausdorff(a: &[Point3], b: &[Point3]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Fermat point of a triangle whose angles are all below 2pi/3.
fn fermat_point(a: Point3, b: Point3, c: Point3) -> Point3 {
    // Barycentric weights a * csc(A + pi/3) : ...
    let la = b.dist(c);
    let lb = a.dist(c);
    let lc = a.dist(b);
    let ang_a = angle_at(b, a, c).unwrap_or(0.0);
    let ang_b = angle_at(a, b, c).unwrap_or(0.0);
    let ang_c = angle_at(a, c, b).unwrap_or(0.0);
    let wa = la / (ang_a + PI / 3.0).sin();
    let wb = lb / (ang_b + PI / 3.0).sin();
    let wc = lc / (ang_c + PI / 3.0).sin();
    let mut f = (a * wa + b * wb + c * wc) / (wa + wb + wc);
    // Weiszfeld polish: the closed form loses digits near the 2pi/3 boundary.
    for _ in 0..200 {
        let (da, db, dc) = (f.dist(a), f.dist(b), f.dist(c));
        if da < 1e-15 || db < 1e-15 || dc < 1e-15 {
            break;
        }
        let g = (a - f) / da + (b - f) / db + (c - f) / dc;
        let next = (a / da + b / db + c / dc) / (1.0 / da + 1.0 / db + 1.0 / dc);
        let step = next.dist(f);
        f = next;
        if g.norm() < 1e-15 || step < 1e-16 {
            break;
        }
    }
    f
}

/// Minimal tree of three points: a two-edge path through the vertex with an
/// angle of at least 2pi/3, otherwise a triod around the Fermat point.
pub fn three_point_minimal_tree(a: Point3, b: Point3, c: Point3) -> Result<EmbeddedGraph> {
    let pts = [a, b, c];
    for i in 0..3 {
        for j in i + 1..3 {
            if pts[i].dist(pts[j]) < 1e-12 {
                return Err(Error::Degenerate(format!("points {i} and {j} coincide")));
            }
        }
    }
    let mut g = EmbeddedGraph::default();
    for p in pts {
        g.push_vertex(p, Role::Terminal);
    }
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let ang = angle_at(pts[j], pts[i], pts[k])?;
        if ang >= TWO_PI_OVER_3 - 1e-12 {
            g.edges = vec![(i.min(j), i.max(j)), (i.min(k), i.max(k))];
            g.recompute_length();
            return Ok(g);
        }
    }
    let s = g.push_vertex(fermat_point(a, b, c), Role::Steiner);
    g.edges = vec![(0, s), (1, s), (2, s)];
    g.recompute_length();
    Ok(g)
}

/// Euclidean minimum spanning tree (Prim, O(n^2)).
pub fn minimum_spanning_tree(points: &[Point3]) -> Result<EmbeddedGraph> {
    if points.is_empty() {
        return Err(Error::Empty("minimum_spanning_tree points"));
    }
    let n = points.len();
    let mut g = EmbeddedGraph::default();
    for &p in points {
        g.push_vertex(p, Role::Terminal);
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (points[0].dist(points[j]), 0);
    }
    for _ in 1..n {
        let (v, &(_, from)) = best
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_tree[*i])
            .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .expect("vertex left");
        in_tree[v] = true;
        g.edges.push((from.min(v), from.max(v)));
        for j in 0..n {
            if !in_tree[j] {
                let d = points[v].dist(points[j]);
                if d < best[j].0 {
                    best[j] = (d, v);
                }
            }
        }
    }
    g.recompute_length();
    Ok(g)
}

/// A rigid motion `p -> R p + t` with `R` a rotation.
#[derive(Debug, Clone, Copy)]
pub struct RigidMotion {
    pub axis: Point3,
    pub angle: f64,
    pub translation: Point3,
}

impl RigidMotion {
    pub fn apply(&self, p: Point3) -> Point3 {
        p.rotate(self.axis, self.angle) + self.translation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S3: f64 = 1.7320508075688772;

    #[test]
    fn spherical_examples() {
        let p = spherical_to_cartesian(SphericalCoord::new(1.0, 0.0, PI / 2.0));
        assert!(p.approx_eq(Point3::new(1.0, 0.0, 0.0), 1e-15));
        let d = 0.05;
        let q = spherical_to_cartesian(SphericalCoord::new(1.0, PI, PI / 2.0 - d));
        assert!(q.approx_eq(Point3::new(-0.99875, 0.0, 0.04998), 1e-5));
        let z = spherical_to_cartesian(SphericalCoord::new(0.0, 1.3, 0.4));
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn angle_examples() {
        let a1 = Point3::new(-0.5, 0.0, S3 / 2.0);
        let b1 = Point3::new(-1.0, 0.0, 0.0);
        let c1 = Point3::new(-0.5, 0.0, -S3 / 2.0);
        assert!((angle_at(a1, b1, c1).unwrap() - TWO_PI_OVER_3).abs() < 1e-12);
        assert_eq!(angle_at(a1, b1, a1).unwrap(), 0.0);
        let ang = angle_at(Point3::new(-1.0, 0.0, 0.0), Point3::ORIGIN, Point3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((ang - PI).abs() < 1e-15);
        assert!(angle_at(a1, a1, c1).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let a = vec![Point3::ORIGIN];
        let b = vec![Point3::new(1.0, 0.0, 0.0)];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
        assert!(hausdorff_distance(&a, &[]).is_err());
        // Coaxial circles: exact distance sqrt((1 - r)^2 + h^2).
        let h: f64 = 0.03;
        let q = Circle3::equator().sample(2000);
        let qd = Circle3::horizontal(h).sample(2000);
        let exact = ((1.0 - (1.0 - h * h).sqrt()).powi(2) + h * h).sqrt();
        let got = hausdorff_distance(&q, &qd).unwrap();
        assert!(got < 0.05);
        assert!((got - exact).abs() < 1e-9);
    }

    #[test]
    fn three_point_examples() {
        let e = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.5, S3 / 2.0, 0.0)];
        let t = three_point_minimal_tree(e[0], e[1], e[2]).unwrap();
        assert_eq!(t.steiner_count(), 1);
        assert!((t.length - S3).abs() < 1e-12);
        // Dense grid cross-check of the Fermat point.
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let p = Point3::new(i as f64 / 400.0, j as f64 / 400.0, 0.0);
                best = best.min(e.iter().map(|q| q.dist(p)).sum());
            }
        }
        assert!(best >= t.length - 1e-12 && best - t.length < 1e-4);

        let t = three_point_minimal_tree(Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), Point3::new(-1.0, 0.0, 0.0)).unwrap();
        assert_eq!(t.steiner_count(), 0);
        assert_eq!(t.edges.len(), 2);
        assert!((t.length - 2.0).abs() < 1e-15);

        let a1 = Point3::new(-0.5, 0.0, S3 / 2.0);
        let c2 = Point3::new(0.5, 0.0, S3 / 2.0);
        let b4 = Point3::new(0.0, 1.0, 0.0);
        let t = three_point_minimal_tree(a1, c2, b4).unwrap();
        assert!((t.length - (7f64.sqrt() + S3) / 2.0).abs() < 1e-12);
        assert!(three_point_minimal_tree(a1, a1, b4).is_err());
    }

    #[test]
    fn fermat_angles() {
        let t = three_point_minimal_tree(
            Point3::new(0.1, 0.2, -0.3),
            Point3::new(1.2, -0.1, 0.4),
            Point3::new(0.3, 1.1, 0.2),
        )
        .unwrap();
        let s = t.vertices[3].xyz;
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let ang = angle_at(t.vertices[i].xyz, s, t.vertices[j].xyz).unwrap();
            assert!((ang - TWO_PI_OVER_3).abs() < 1e-10);
        }
    }

    #[test]
    fn circle_closest_examples() {
        let c = Circle3::equator();
        let q = closest_point_on_circle(Point3::new(2.0, 0.0, 0.0), &c).unwrap();
        assert!(q.approx_eq(Point3::new(1.0, 0.0, 0.0), 1e-15));
        assert!(matches!(closest_point_on_circle(Point3::new(0.0, 0.0, 5.0), &c), Err(Error::Nonunique(_))));
        let p = Point3::new(1.0, 1.0, 1.0);
        let q = closest_point_on_circle(p, &c).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!(q.approx_eq(Point3::new(h, h, 0.0), 1e-15));
        // Sampling oracle.
        let n = 1_000_000;
        let best = (0..n)
            .map(|i| c.point_at(2.0 * PI * i as f64 / n as f64).dist(p))
            .fold(f64::INFINITY, f64::min);
        assert!(q.dist(p) <= best + 1e-15 && best - q.dist(p) < 1e-10);
    }

    #[test]
    fn mst_examples() {
        let two = minimum_spanning_tree(&[Point3::ORIGIN, Point3::new(0.0, 2.0, 0.0)]).unwrap();
        assert_eq!(two.edges, vec![(0, 1)]);
        let hex: Vec<Point3> = (0..4)
            .map(|k| {
                let t = PI / 2.0 + k as f64 * PI / 3.0;
                Point3::new(t.cos(), 0.0, t.sin())
            })
            .collect();
        assert!((minimum_spanning_tree(&hex).unwrap().length - 3.0).abs() < 1e-12);
        let sq = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!((minimum_spanning_tree(&sq).unwrap().length - 3.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_arc_basics() {
        let a = SphereArc::constant_phi(SphericalCoord::unit(PI, 1.5), SphericalCoord::unit(1.25 * PI, 1.5)).unwrap();
        assert!((a.length() - 0.25 * PI * 1.5f64.sin()).abs() < 1e-15);
        assert!(a.point_at(a.length()).approx_eq(a.end.to_cartesian(), 1e-12));
        let g = SphereArc::great_circle(SphericalCoord::unit(1.25 * PI, 1.5), SphericalCoord::unit(1.75 * PI, PI / 2.0)).unwrap();
        assert!(g.point_at(g.length()).approx_eq(g.end.to_cartesian(), 1e-12));
        let p = g.point_at(0.3) * 1.7;
        assert!((g.closest_param(p) - 0.3).abs() < 1e-12);
        let p = a.point_at(0.2) * 0.8;
        assert!((a.closest_param(p) - 0.2).abs() < 1e-12);
    }

    fn pt() -> impl Strategy<Value = Point3> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn triod_is_no_longer_than_paths(a in pt(), b in pt(), c in pt()) {
            prop_assume!(a.dist(b) > 1e-3 && b.dist(c) > 1e-3 && a.dist(c) > 1e-3);
            let t = three_point_minimal_tree(a, b, c).unwrap();
            let paths = [a.dist(b) + a.dist(c), b.dist(a) + b.dist(c), c.dist(a) + c.dist(b)];
            let best_path = paths.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(t.length <= best_path + 1e-9);
            let max_angle = [angle_at(b, a, c).unwrap(), angle_at(a, b, c).unwrap(), angle_at(a, c, b).unwrap()]
                .into_iter().fold(0.0, f64::max);
            if max_angle >= TWO_PI_OVER_3 + 1e-9 {
                prop_assert!((t.length - best_path).abs() < 1e-9);
            } else if max_angle < TWO_PI_OVER_3 - 1e-6 {
                prop_assert!(t.length < best_path - 1e-12);
            }
        }

        #[test]
        fn triod_rigid_invariance(a in pt(), b in pt(), c in pt(), ax in pt(), ang in 0.0..6.3f64, tr in pt()) {
            prop_assume!(a.dist(b) > 1e-3 && b.dist(c) > 1e-3 && a.dist(c) > 1e-3 && ax.norm() > 1e-2);
            let m = RigidMotion { axis: ax.normalized().unwrap(), angle: ang, translation: tr };
            let l0 = three_point_minimal_tree(a, b, c).unwrap().length;
            let l1 = three_point_minimal_tree(m.apply(a), m.apply(b), m.apply(c)).unwrap().length;
            prop_assert!((l0 - l1).abs() < 1e-9);
        }

        #[test]
        fn hausdorff_triangle_inequality(
            a in proptest::collection::vec(pt(), 1..8),
            b in proptest::collection::vec(pt(), 1..8),
            c in proptest::collection::vec(pt(), 1..8),
        ) {
            let ab = hausdorff_distance(&a, &b).unwrap();
            let bc = hausdorff_distance(&b, &c).unwrap();
            let ac = hausdorff_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - hausdorff_distance(&b, &a).unwrap()).abs() == 0.0);
        }

        #[test]
        fn circle_projection_is_closest(p in pt()) {
            let c = Circle3::new(Point3::new(0.1, -0.2, 0.3), 0.8, Point3::new(0.2, 0.1, 1.0)).unwrap();
            if let Ok(q) = closest_point_on_circle(p, &c) {
                let d = q.dist(p);
                for i in 0..10_000 {
                    let s = c.point_at(2.0 * PI * i as f64 / 10_000.0);
                    prop_assert!(d <= s.dist(p) + 1e-12);
                }
            }
        }

        #[test]
        fn spherical_round_trip(r in 0.01..3.0f64, th in -3.1..3.1f64, ph in 0.01..3.13f64) {
            let p = SphericalCoord::new(r, th, ph).to_cartesian();
            let c = SphericalCoord::from_cartesian(p);
            prop_assert!((c.r - r).abs() < 1e-12 && (c.theta - th).abs() < 1e-12 && (c.phi - ph).abs() < 1e-12);
        }
    }
}
