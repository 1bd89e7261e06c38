//! Continuum terminals: curves that a connecting graph may touch anywhere.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Circle3, Point3, Segment, SphereArc};

#[derive(Debug, Clone, PartialEq)]
pub enum Continuum {
    /// Periodic; the parameter is the circle angle.
    Circle(Circle3),
    /// Chain of sphere arcs parameterized by total arclength.
    Arcs(Vec<SphereArc>),
    /// Open polyline parameterized by arclength.
    Polyline(Vec<Point3>),
}

impl Continuum {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Continuum::Circle(_))
    }

    /// Parameter bounds for open curves.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            Continuum::Circle(_) => None,
            _ => Some((0.0, self.length())),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Continuum::Circle(c) => c.length(),
            Continuum::Arcs(a) => a.iter().map(|x| x.length()).sum(),
            Continuum::Polyline(p) => p.windows(2).map(|w| w[0].dist(w[1])).sum(),
        }
    }

    /// Piece index and local parameter for an arclength parameter.
    fn locate<T>(pieces: &[T], len: impl Fn(&T) -> f64, t: f64) -> (usize, f64) {
        let mut acc = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            let l = len(p);
            if t <= acc + l || i + 1 == pieces.len() {
                return (i, (t - acc).clamp(0.0, l));
            }
            acc += l;
        }
        (0, 0.0)
    }

    fn poly_segments(p: &[Point3]) -> Vec<Segment> {
        p.windows(2).map(|w| Segment::new(w[0], w[1])).collect()
    }

    pub fn point(&self, t: f64) -> Point3 {
        match self {
            Continuum::Circle(c) => c.point_at(t),
            Continuum::Arcs(a) => {
                let (i, s) = Self::locate(a, |x| x.length(), t);
                a[i].point_at(s)
            }
            Continuum::Polyline(p) => {
                let segs = Self::poly_segments(p);
                let (i, s) = Self::locate(&segs, |x| x.length(), t);
                let l = segs[i].length();
                if l == 0.0 {
                    segs[i].a
                } else {
                    segs[i].a.lerp(segs[i].b, s / l)
                }
            }
        }
    }

    /// First and second derivative with respect to the parameter.
    pub fn derivatives(&self, t: f64) -> (Point3, Point3) {
        match self {
            Continuum::Circle(c) => (c.tangent_at(t), c.second_derivative_at(t)),
            Continuum::Arcs(a) => {
                let (i, s) = Self::locate(a, |x| x.length(), t);
                (a[i].tangent_at(s), a[i].second_derivative_at(s))
            }
            Continuum::Polyline(p) => {
                let segs = Self::poly_segments(p);
                let (i, _) = Self::locate(&segs, |x| x.length(), t);
                let d = (segs[i].b - segs[i].a).normalized().unwrap_or_default();
                (d, Point3::ORIGIN)
            }
        }
    }

    /// Parameter of a nearest point on the curve.
    pub fn closest_param(&self, p: Point3) -> Result<f64> {
        match self {
            Continuum::Circle(c) => c
                .closest_param(p)
                .ok_or_else(|| Error::Nonunique(format!("{p} lies on the circle axis"))),
            Continuum::Arcs(a) => {
                let mut acc = 0.0;
                let mut best = (f64::INFINITY, 0.0);
                for arc in a {
                    let s = arc.closest_param(p);
                    let d = arc.point_at(s).dist(p);
                    if d < best.0 {
                        best = (d, acc + s);
                    }
                    acc += arc.length();
                }
                Ok(best.1)
            }
            Continuum::Polyline(pts) => {
                let mut acc = 0.0;
                let mut best = (f64::INFINITY, 0.0);
                for s in Self::poly_segments(pts) {
                    let q = s.closest_point(p);
                    let d = q.dist(p);
                    if d < best.0 {
                        best = (d, acc + q.dist(s.a));
                    }
                    acc += s.length();
                }
                Ok(best.1)
            }
        }
    }

    pub fn distance_to(&self, p: Point3) -> Result<f64> {
        Ok(self.point(self.closest_param(p)?).dist(p))
    }

    /// Evenly spaced samples (in parameter) for Hausdorff comparisons.
    pub fn sample(&self, n: usize) -> Vec<Point3> {
        let n = n.max(2);
        match self.bounds() {
            None => (0..n).map(|i| self.point(2.0 * PI * i as f64 / n as f64)).collect(),
            Some((lo, hi)) => (0..=n).map(|i| self.point(lo + (hi - lo) * i as f64 / n as f64)).collect(),
        }
    }

    /// Wraps periodic parameters into `[0, 2pi)` and clamps open ones.
    pub fn normalize_param(&self, t: f64) -> f64 {
        match self.bounds() {
            None => t.rem_euclid(2.0 * PI),
            Some((lo, hi)) => t.clamp(lo, hi),
        }
    }
}
