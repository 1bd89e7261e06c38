//! The named point configurations: hexagon H, the split points, the arc M
//! and its discretized chain, and the terminal set X.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::continuum::Continuum;
use crate::error::{Error, Result};
use crate::geometry::{Point3, SphereArc, SphericalCoord};
use crate::opt::TerminalSet;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        ConstructionParams { gamma: 0.1, delta: 0.05, eps: 0.05 }
    }
}

impl ConstructionParams {
    pub fn new(gamma: f64, delta: f64, eps: f64) -> Result<Self> {
        let p = ConstructionParams { gamma, delta, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::OutOfRange(format!("gamma = {} not in (0, 1)", self.gamma)));
        }
        if !(self.delta > 0.0 && self.delta < FRAC_PI_2) {
            return Err(Error::OutOfRange(format!("delta = {} not in (0, pi/2)", self.delta)));
        }
        if !(self.eps > 0.0 && self.eps < FRAC_PI_4) {
            return Err(Error::OutOfRange(format!("eps = {} not in (0, pi/4)", self.eps)));
        }
        Ok(())
    }

    /// All three parameters halved (the `--strict` re-validation triple).
    pub fn halved(&self) -> Self {
        ConstructionParams { gamma: self.gamma / 2.0, delta: self.delta / 2.0, eps: self.eps / 2.0 }
    }
}

/// Labeled points in insertion order plus the chain labels t1..tn.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NamedPointSet {
    pub points: Vec<(String, Point3)>,
    pub chain: Vec<String>,
}

impl NamedPointSet {
    pub fn get(&self, label: &str) -> Option<Point3> {
        self.points.iter().find(|(l, _)| l == label).map(|p| p.1)
    }

    /// Like `get`, for labels that are known to exist.
    pub fn at(&self, label: &str) -> Point3 {
        self.get(label).unwrap_or_else(|| panic!("no point labeled `{label}`"))
    }

    pub fn insert(&mut self, label: impl Into<String>, p: Point3) {
        let label = label.into();
        match self.points.iter_mut().find(|(l, _)| *l == label) {
            Some(slot) => slot.1 = p,
            None => self.points.push((label, p)),
        }
    }

    pub fn n(&self) -> usize {
        self.chain.len()
    }

    pub fn extend(&mut self, other: NamedPointSet) {
        for (l, p) in other.points {
            self.insert(l, p);
        }
        if !other.chain.is_empty() {
            self.chain = other.chain;
        }
    }
}

pub fn hexagon_vertices() -> NamedPointSet {
    let h = SQRT3 / 2.0;
    let mut s = NamedPointSet::default();
    s.insert("a1", Point3::new(-0.5, 0.0, h));
    s.insert("b1", Point3::new(-1.0, 0.0, 0.0));
    s.insert("c1", Point3::new(-0.5, 0.0, -h));
    s.insert("a2", Point3::new(0.5, 0.0, -h));
    s.insert("b2", Point3::new(1.0, 0.0, 0.0));
    s.insert("c2", Point3::new(0.5, 0.0, h));
    s.insert("b4", Point3::new(0.0, 1.0, 0.0));
    s.insert("b5", Point3::new(0.0, -1.0, 0.0));
    s
}

/// c1(γ), c2(γ) and the sphere points e_i (y > 0), f_i (y < 0) above and
/// below them.
pub fn split_points(gamma: f64) -> Result<NamedPointSet> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} not in (0, 1)")));
    }
    let z = SQRT3 / 2.0 * (1.0 - gamma);
    let y = (3.0 * gamma * (2.0 - gamma)).sqrt() / 2.0;
    let mut s = NamedPointSet::default();
    s.insert("c1(g)", Point3::new(-0.5, 0.0, -z));
    s.insert("c2(g)", Point3::new(0.5, 0.0, z));
    s.insert("e1", Point3::new(-0.5, y, -z));
    s.insert("f1", Point3::new(-0.5, -y, -z));
    s.insert("e2", Point3::new(0.5, y, z));
    s.insert("f2", Point3::new(0.5, -y, z));
    Ok(s)
}

pub fn d_points(delta: f64) -> (Point3, Point3) {
    (
        SphericalCoord::unit(PI, FRAC_PI_2 - delta).to_cartesian(),
        SphericalCoord::unit(0.0, FRAC_PI_2 + delta).to_cartesian(),
    )
}

/// The five pieces of M, all traversed with θ increasing: a latitude arc
/// at φ = π/2 − δ from θ = π to 5π/4, a great-circle arc down to the
/// equator at 7π/4, the equator from 7π/4 once around to 13π/4, a
/// great-circle arc from the equator at 5π/4 to φ = π/2 + δ at 7π/4, and a
/// latitude arc at φ = π/2 + δ up to θ = 2π.
pub fn arc_m(delta: f64) -> Result<Vec<SphereArc>> {
    if !(delta > 0.0 && delta < FRAC_PI_2) {
        return Err(Error::OutOfRange(format!("delta = {delta} not in (0, pi/2)")));
    }
    let up = FRAC_PI_2 - delta;
    let down = FRAC_PI_2 + delta;
    let (t5, t7) = (5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4);
    let u = SphericalCoord::unit;
    Ok(vec![
        SphereArc::constant_phi(u(PI, up), u(t5, up))?,
        SphereArc::great_circle(u(t5, up), u(t7, FRAC_PI_2))?,
        SphereArc::constant_phi(u(t7, FRAC_PI_2), u(t7 + 1.5 * PI, FRAC_PI_2))?,
        SphereArc::great_circle(u(t5, FRAC_PI_2), u(t7, down))?,
        SphereArc::constant_phi(u(t7, down), u(2.0 * PI, down))?,
    ])
}

/// Exact length of M.
pub fn arc_m_length_closed_form(delta: f64) -> f64 {
    // Constant-latitude pieces: θ-sweeps π/4 each at radius cos δ.
    // Great-circle pieces: endpoints at 90° in θ, one of them on the
    // equator, so the central angle is π/2 exactly.
    // Equator: 3π/2.
    2.0 * (FRAC_PI_4 * delta.cos()) + 2.0 * FRAC_PI_2 + 1.5 * PI
}

/// Chain points t1..tn. t1 and tn straddle the ends of M just outside it;
/// t2..t(n-1) are uniform in arclength along M with chord gaps at most
/// 0.9·eps.
pub fn sample_chain(delta: f64, eps: f64) -> Result<Vec<Point3>> {
    let arcs = arc_m(delta)?;
    if !(eps > 0.0 && eps < FRAC_PI_4) {
        return Err(Error::OutOfRange(format!("eps = {eps} not in (0, pi/4)")));
    }
    let m = Continuum::Arcs(arcs);
    let total = m.length();
    let s0 = eps * delta.cos();
    let s1 = total - s0;
    let intervals = ((s1 - s0) / (0.9 * eps)).ceil() as usize;
    let up = FRAC_PI_2 - delta;
    let down = FRAC_PI_2 + delta;
    let mut out = vec![SphericalCoord::unit(PI - eps, up).to_cartesian()];
    for i in 0..=intervals {
        let s = if i == intervals { s1 } else { s0 + (s1 - s0) * i as f64 / intervals as f64 };
        out.push(m.point(s));
    }
    out.push(SphericalCoord::unit(eps, down).to_cartesian());
    // Exact endpoints for the labeled straddle points.
    out[1] = SphericalCoord::unit(PI + eps, up).to_cartesian();
    let k = out.len();
    out[k - 2] = SphericalCoord::unit(-eps, down).to_cartesian();
    let straddle = out[0].dist(out[1]);
    let max_gap = out[1..k - 1].windows(2).map(|w| w[0].dist(w[1])).fold(0.0, f64::max);
    if !(max_gap < eps && straddle > max_gap) {
        return Err(Error::OutOfRange(format!(
            "eps = {eps} too large: straddle gap {straddle:.6} vs interior gap {max_gap:.6}"
        )));
    }
    Ok(out)
}

/// Every named point of the construction for the given parameters.
pub fn named_points(params: &ConstructionParams) -> Result<NamedPointSet> {
    params.validate()?;
    let mut s = hexagon_vertices();
    s.extend(split_points(params.gamma)?);
    let (d1, d2) = d_points(params.delta);
    s.insert("d1", d1);
    s.insert("d2", d2);
    // Points of Q in the xz-plane next to b1, b2 where the split triods attach.
    s.insert("v1", Point3::new(-1.0, 0.0, 0.0));
    s.insert("v2", Point3::new(1.0, 0.0, 0.0));
    let chain = sample_chain(params.delta, params.eps)?;
    for (i, p) in chain.iter().enumerate() {
        s.insert(format!("t{}", i + 1), *p);
    }
    s.chain = (1..=chain.len()).map(|i| format!("t{i}")).collect();
    Ok(s)
}

pub const CLUSTER_HEAD: [&str; 3] = ["a1", "e1", "f1"];
pub const CLUSTER_TAIL: [&str; 3] = ["a2", "e2", "f2"];

/// The terminal set X = {a1, e1, f1, a2, e2, f2, t1, ..., tn}.
pub fn build_x(params: &ConstructionParams) -> Result<(TerminalSet, NamedPointSet)> {
    let named = named_points(params)?;
    let labels = CLUSTER_HEAD.iter().chain(CLUSTER_TAIL.iter()).map(|s| s.to_string()).chain(named.chain.iter().cloned());
    let points = labels.map(|l| { let p = named.at(&l); (l, p) }).collect();
    Ok((TerminalSet::new(points, vec![])?, named))
}
