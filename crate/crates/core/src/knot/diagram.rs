//! Knot diagrams: generic projections of polygons, PD-code fixtures, the
//! Alexander matrix and an SVG rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

use super::curve::PolygonalCurve;
use super::poly::{bareiss_determinant, IntPoly, LaurentPolynomial};

pub const PARALLEL_TOL: f64 = 1e-6;
pub const TRIPLE_TOL: f64 = 1e-8;
pub const MAX_DIRECTIONS: usize = 1000;

/// One crossing: the arc passing over, the under arcs entering and leaving,
/// and the sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub over: usize,
    pub under_in: usize,
    pub under_out: usize,
    pub sign: i8,
}

/// A projected crossing position, used for rendering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSite {
    pub at: [f64; 2],
    pub under_segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotDiagram {
    pub crossings: Vec<Crossing>,
    pub arc_count: usize,
    pub gauss_code: String,
    pub direction: Option<Point3>,
    /// Projected polygon and crossing sites when built from a curve.
    pub projection: Option<(Vec<[f64; 2]>, Vec<CrossingSite>)>,
}

/// The `i`-th direction of a seeded low-discrepancy sequence on the sphere.
pub fn view_direction(seed: u64, i: usize) -> Point3 {
    // Additive recurrence with the plastic-number constants.
    const G: f64 = 1.324_717_957_244_746;
    let k = (seed.wrapping_mul(1009).wrapping_add(i as u64)) as f64 + 1.0;
    let u = (0.5 + k / G).fract();
    let v = (0.5 + k / (G * G)).fract();
    let z = 1.0 - 2.0 * u;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let a = 2.0 * std::f64::consts::PI * v;
    Point3::new(r * a.cos(), r * a.sin(), z)
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

struct RawCrossing {
    seg: [usize; 2],
    param: [f64; 2],
    at: [f64; 2],
    /// Index into `seg` of the strand on top.
    top: usize,
}

/// Projects along `d`; `None` when the projection is not generic.
fn try_project(c: &PolygonalCurve, d: Point3) -> Option<(Vec<[f64; 2]>, Vec<RawCrossing>, Vec<f64>)> {
    let u = d.any_orthonormal();
    let w = d.cross(u);
    let v = c.vertices();
    let n = v.len();
    let pts: Vec<[f64; 2]> = v.iter().map(|p| [p.dot(u), p.dot(w)]).collect();
    let depth: Vec<f64> = v.iter().map(|p| p.dot(d)).collect();
    for i in 0..n {
        let j = (i + 1) % n;
        let l3 = v[i].dist(v[j]);
        if norm2(sub2(pts[j], pts[i])) < PARALLEL_TOL * l3 {
            return None;
        }
    }
    let mut raw = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a0, a1) = (pts[i], pts[(i + 1) % n]);
            let (b0, b1) = (pts[j], pts[(j + 1) % n]);
            let da = sub2(a1, a0);
            let db = sub2(b1, b0);
            let den = cross2(da, db);
            let r = sub2(b0, a0);
            let (la, lb) = (norm2(da), norm2(db));
            if den.abs() <= 1e-14 * la * lb {
                // Parallel in projection: overlapping collinear pieces are not generic.
                if cross2(r, da).abs() <= TRIPLE_TOL * la && !adjacent {
                    let t0 = r[0] * da[0] + r[1] * da[1];
                    let t1 = sub2(b1, a0)[0] * da[0] + sub2(b1, a0)[1] * da[1];
                    let (lo, hi) = (t0.min(t1), t0.max(t1));
                    if hi >= -TRIPLE_TOL * la && lo <= la * la + TRIPLE_TOL * la {
                        return None;
                    }
                }
                if adjacent && (da[0] * db[0] + da[1] * db[1]) < 0.0 && cross2(r, da).abs() <= TRIPLE_TOL * la {
                    // Fold-back onto the previous segment.
                    return None;
                }
                continue;
            }
            let s = cross2(r, db) / den;
            let t = cross2(r, da) / den;
            if adjacent {
                continue;
            }
            let ea = TRIPLE_TOL / la;
            let eb = TRIPLE_TOL / lb;
            if s < -ea || s > 1.0 + ea || t < -eb || t > 1.0 + eb {
                continue;
            }
            if s <= ea || s >= 1.0 - ea || t <= eb || t >= 1.0 - eb {
                // Crossing at or near a vertex.
                return None;
            }
            let za = depth[i] + s * (depth[(i + 1) % n] - depth[i]);
            let zb = depth[j] + t * (depth[(j + 1) % n] - depth[j]);
            if (za - zb).abs() < TRIPLE_TOL {
                return None;
            }
            let at = [a0[0] + s * da[0], a0[1] + s * da[1]];
            raw.push(RawCrossing { seg: [i, j], param: [s, t], at, top: if za > zb { 0 } else { 1 } });
        }
    }
    for a in 0..raw.len() {
        for b in a + 1..raw.len() {
            if norm2(sub2(raw[a].at, raw[b].at)) < TRIPLE_TOL {
                return None;
            }
        }
    }
    Some((pts, raw, depth))
}

impl KnotDiagram {
    /// Generic projection of `c`: the first direction from the seeded
    /// sequence that passes every genericity check.
    pub fn project(c: &PolygonalCurve, seed: u64) -> Result<Self> {
        for i in 0..MAX_DIRECTIONS {
            let d = view_direction(seed, i);
            if let Some((pts, raw, _)) = try_project(c, d) {
                return Ok(Self::from_projection(c.len(), pts, raw, d));
            }
        }
        Err(Error::NotGeneric(MAX_DIRECTIONS))
    }

    fn from_projection(n: usize, pts: Vec<[f64; 2]>, raw: Vec<RawCrossing>, d: Point3) -> Self {
        // Events along the curve: (segment, param, crossing, is_over).
        let mut events: Vec<(usize, f64, usize, bool)> = Vec::new();
        for (k, r) in raw.iter().enumerate() {
            for side in 0..2 {
                events.push((r.seg[side], r.param[side], k, side == r.top));
            }
        }
        events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let c = raw.len();
        let mut sites = Vec::with_capacity(c);
        for r in &raw {
            sites.push(CrossingSite { at: r.at, under_segment: r.seg[1 - r.top] });
        }
        if c == 0 {
            return KnotDiagram { crossings: vec![], arc_count: 0, gauss_code: String::new(), direction: Some(d), projection: Some((pts, sites)) };
        }
        // Signs from projected directions of the over and under strands.
        let dir = |s: usize| sub2(pts[(s + 1) % n], pts[s]);
        let signs: Vec<i8> = raw
            .iter()
            .map(|r| {
                let o = dir(r.seg[r.top]);
                let u = dir(r.seg[1 - r.top]);
                if cross2(o, u) > 0.0 { 1 } else { -1 }
            })
            .collect();
        let seq: Vec<(usize, bool)> = events.iter().map(|e| (e.2, e.3)).collect();
        Self::from_sequence(&seq, &signs, Some(d), Some((pts, sites)))
    }

    /// Builds arcs and crossings from the cyclic over/under event sequence.
    fn from_sequence(
        seq: &[(usize, bool)],
        signs: &[i8],
        direction: Option<Point3>,
        projection: Option<(Vec<[f64; 2]>, Vec<CrossingSite>)>,
    ) -> Self {
        let c = signs.len();
        let start = seq.iter().position(|e| !e.1).expect("every crossing has an under event");
        let rot: Vec<(usize, bool)> = seq[start..].iter().chain(&seq[..start]).copied().collect();
        let mut crossings = vec![Crossing { over: 0, under_in: 0, under_out: 0, sign: 0 }; c];
        let mut passed = 0usize;
        for &(k, over) in &rot {
            if over {
                crossings[k].over = passed - 1;
            } else {
                crossings[k].under_in = (passed + c - 1) % c;
                crossings[k].under_out = passed % c;
                passed += 1;
            }
        }
        for (x, &s) in crossings.iter_mut().zip(signs) {
            x.sign = s;
        }
        // Gauss code numbered by first appearance along the curve.
        let mut label = vec![0usize; c];
        let mut next = 1;
        let mut code = Vec::with_capacity(seq.len());
        for &(k, over) in seq {
            if label[k] == 0 {
                label[k] = next;
                next += 1;
            }
            let s = if signs[k] > 0 { '+' } else { '-' };
            code.push(format!("{}{}{}", if over { 'O' } else { 'U' }, label[k], s));
        }
        KnotDiagram { crossings, arc_count: c, gauss_code: code.join(" "), direction, projection }
    }

    /// Diagram from a planar-diagram code `X[i,j,k,l]`: i enters under,
    /// k leaves under, j and l are the over strand.
    pub fn from_pd(pd: &[[usize; 4]]) -> Result<Self> {
        let c = pd.len();
        if c == 0 {
            return Ok(KnotDiagram { crossings: vec![], arc_count: 0, gauss_code: String::new(), direction: None, projection: None });
        }
        let m = 2 * c;
        let mut seen = vec![0usize; m + 1];
        for x in pd {
            for &e in x {
                if e == 0 || e > m {
                    return Err(Error::InvalidDiagram(format!("edge label {e} outside 1..={m}")));
                }
                seen[e] += 1;
            }
        }
        if seen[1..].iter().any(|&s| s != 2) {
            return Err(Error::InvalidDiagram("each edge label must appear exactly twice".into()));
        }
        let next = |e: usize| e % m + 1;
        // Walk edges 1..2c in order; an under event happens at the crossing
        // where edge e enters as `i`, an over event where it enters as j or l.
        let mut seq = Vec::with_capacity(m);
        let mut signs = vec![0i8; c];
        for (k, x) in pd.iter().enumerate() {
            if x[2] != next(x[0]) {
                return Err(Error::InvalidDiagram(format!("crossing {k}: under strand {} -> {} is not consecutive", x[0], x[2])));
            }
            signs[k] = if x[3] == next(x[1]) {
                -1
            } else if x[1] == next(x[3]) {
                1
            } else {
                return Err(Error::InvalidDiagram(format!("crossing {k}: over strand not consecutive")));
            };
        }
        for e in 1..=m {
            for (k, x) in pd.iter().enumerate() {
                let over_in = if signs[k] < 0 { x[1] } else { x[3] };
                if x[0] == e {
                    seq.push((k, false));
                } else if over_in == e {
                    seq.push((k, true));
                }
            }
        }
        if seq.len() != m {
            return Err(Error::InvalidDiagram("inconsistent PD code".into()));
        }
        let d = Self::from_sequence(&seq, &signs, None, None);
        d.validate()?;
        Ok(d)
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.arc_count != self.crossings.len() {
            return Err(Error::InvalidDiagram("arc count differs from crossing count".into()));
        }
        for (k, x) in self.crossings.iter().enumerate() {
            if x.over >= self.arc_count || x.under_in >= self.arc_count || x.under_out >= self.arc_count || x.sign.abs() != 1 {
                return Err(Error::InvalidDiagram(format!("crossing {k} is malformed")));
            }
        }
        let tokens: Vec<&str> = self.gauss_code.split_whitespace().collect();
        if tokens.len() != 2 * self.crossings.len() {
            return Err(Error::InvalidDiagram("Gauss code must list each crossing twice".into()));
        }
        for i in 1..=self.crossings.len() {
            let o = tokens.iter().filter(|t| t.starts_with('O') && t[1..t.len() - 1] == i.to_string()).count();
            let u = tokens.iter().filter(|t| t.starts_with('U') && t[1..t.len() - 1] == i.to_string()).count();
            if o != 1 || u != 1 {
                return Err(Error::InvalidDiagram(format!("crossing {i} not once over and once under")));
            }
        }
        Ok(())
    }

    /// Crossing-by-arc Alexander matrix entries as integer polynomials.
    pub fn alexander_matrix(&self) -> Vec<Vec<IntPoly>> {
        let c = self.crossings.len();
        let mut m = vec![vec![IntPoly::zero(); c]; c];
        for (r, x) in self.crossings.iter().enumerate() {
            let (over, inn, out) = if x.sign > 0 { ([1, -1], [0, 1], [-1, 0]) } else { ([-1, 1], [1, 0], [0, -1]) };
            m[r][x.over] = m[r][x.over].add(&IntPoly::from_i64(&over));
            m[r][x.under_in] = m[r][x.under_in].add(&IntPoly::from_i64(&inn));
            m[r][x.under_out] = m[r][x.under_out].add(&IntPoly::from_i64(&out));
        }
        m
    }

    /// Normalized Alexander polynomial: determinant of the matrix with the
    /// last row and column removed.
    pub fn alexander_polynomial(&self) -> Result<LaurentPolynomial> {
        self.validate()?;
        if self.crossings.is_empty() {
            return Ok(LaurentPolynomial::one());
        }
        let c = self.crossings.len();
        let minor: Vec<Vec<IntPoly>> = self.alexander_matrix()[..c - 1].iter().map(|r| r[..c - 1].to_vec()).collect();
        let det = bareiss_determinant(minor)?;
        if det.is_zero() {
            return Err(Error::InvalidDiagram("Alexander minor vanishes".into()));
        }
        LaurentPolynomial::normalized_from(&det)
    }

    /// SVG of the projected polygon with gaps at under-passes.
    pub fn to_svg(&self) -> Option<String> {
        let (pts, sites) = self.projection.as_ref()?;
        let n = pts.len();
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let size = 600.0;
        let pad = 20.0;
        let scale = (size - 2.0 * pad) / span;
        let map = |p: [f64; 2]| [pad + (p[0] - lo[0]) * scale, size - pad - (p[1] - lo[1]) * scale];
        let gap = 6.0 / scale;
        let mut svg = String::new();
        let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for s in 0..n {
            let (a, b) = (pts[s], pts[(s + 1) % n]);
            let d = sub2(b, a);
            let len = norm2(d);
            // Cut windows around under-crossings on this segment.
            let mut cuts: Vec<f64> = sites
                .iter()
                .filter(|x| x.under_segment == s)
                .map(|x| norm2(sub2(x.at, a)) / len)
                .collect();
            cuts.sort_by(f64::total_cmp);
            let mut t0 = 0.0;
            let half = gap / len;
            let mut pieces = Vec::new();
            for c in cuts {
                pieces.push((t0, (c - half).max(t0)));
                t0 = (c + half).min(1.0);
            }
            pieces.push((t0, 1.0));
            for (u, v) in pieces {
                if v <= u {
                    continue;
                }
                let p = map([a[0] + u * d[0], a[1] + u * d[1]]);
                let q = map([a[0] + v * d[0], a[1] + v * d[1]]);
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2" stroke-linecap="round"/>"#,
                    p[0], p[1], q[0], q[1]
                );
            }
        }
        svg.push_str("</svg>\n");
        Some(svg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn trefoil_pd() -> Vec<[usize; 4]> {
        vec![[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]]
    }

    pub(crate) fn figure_eight_pd() -> Vec<[usize; 4]> {
        vec![[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]]
    }

    /// Coloring matrix (the Alexander matrix at t = −1) built straight from
    /// the crossings, with its minor determinant by floating-point LU.
    fn coloring_determinant(d: &KnotDiagram) -> f64 {
        let c = d.crossings.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(c, c);
        for (r, x) in d.crossings.iter().enumerate() {
            m[(r, x.over)] += 2.0;
            m[(r, x.under_in)] -= 1.0;
            m[(r, x.under_out)] -= 1.0;
        }
        m.view((0, 0), (c - 1, c - 1)).into_owned().determinant().abs()
    }

    #[test]
    fn trefoil_fixture() {
        let d = KnotDiagram::from_pd(&trefoil_pd()).unwrap();
        assert_eq!(d.crossing_count(), 3);
        let a = d.alexander_polynomial().unwrap();
        assert_eq!(a.coeffs, vec![1, -1, 1]);
        assert_eq!(a.determinant(), 3);
        assert!((coloring_determinant(&d) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn figure_eight_fixture() {
        let d = KnotDiagram::from_pd(&figure_eight_pd()).unwrap();
        let a = d.alexander_polynomial().unwrap();
        assert_eq!(a.coeffs, vec![1, -3, 1]);
        assert_eq!(a.determinant(), 5);
        assert!((coloring_determinant(&d) - 5.0).abs() < 1e-9);
        let signs: i32 = d.crossings.iter().map(|x| x.sign as i32).sum();
        assert_eq!(signs, 0);
    }

    #[test]
    fn bad_pd_rejected() {
        assert!(KnotDiagram::from_pd(&[[1, 2, 3, 4]]).is_err());
        assert!(KnotDiagram::from_pd(&[[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 9]]).is_err());
    }

    #[test]
    fn empty_diagram_is_one() {
        let d = KnotDiagram::from_pd(&[]).unwrap();
        assert!(d.alexander_polynomial().unwrap().is_one());
    }

    #[test]
    fn directions_are_unit_and_seeded() {
        for i in 0..50 {
            assert!((view_direction(3, i).norm() - 1.0).abs() < 1e-12);
        }
        assert_ne!(view_direction(0, 0), view_direction(1, 0));
        assert_eq!(view_direction(7, 4), view_direction(7, 4));
    }
}
