//! Numeric checks of the lemma chain leading to the knotted tree. Each
//! lemma becomes a set of inequalities between computed optima and the
//! bounds the argument relies on; a report passes when every inequality
//! holds with positive margin.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{arc_m, build_x, d_points, hexagon_vertices, split_points, ConstructionParams};
use crate::continuum::Continuum;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{minimum_spanning_tree, Circle3, Point3, Segment};
use crate::graph::{EmbeddedGraph, Role};
use crate::knot::{certify, Verdict};
use crate::opt::{
    optimize_fixed_topology, solve_block, solve_decomposed, solve_minimal_graph, solve_minimal_tree, ClusterSpec,
    OptOptions, TerminalSet, TerminalSlot, DIRECTION_SUM_TOL, IMPROVEMENT_TOL,
};
use crate::topology::{ForestCaps, SteinerTopology};

/// Lemma ids in report order.
pub const LEMMA_IDS: [&str; 12] = [
    "four", "five", "hexa", "q-graph", "x", "one-x", "split", "splitfinal", "circles", "splitcircle", "model", "theorem",
];

/// Gamma values swept by `one-x` in addition to the configured one.
pub const ONE_X_GAMMAS: [f64; 3] = [0.02, 0.05, 0.1];
/// Minimum length gap to the best geometrically distinct competitor.
pub const UNIQUENESS_GAP: f64 = 1e-4;
/// Length equalities against closed forms.
pub const LENGTH_TOL: f64 = 1e-9;
pub const CONSTANT_TOL: f64 = 1e-8;
/// Graph-to-edge-set distance for "consists of edges of H".
pub const EDGE_SET_TOL: f64 = 1e-6;
pub const PLANE_TOL: f64 = 1e-8;
pub const SWEEP_POINTS: usize = 50;
pub const SWEEP_ANGLE: f64 = 0.2;
pub const MONOTONE_TOL: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    /// Perturbation trials for the local optimality report.
    pub trials: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for LemmaParams {
    fn default() -> Self {
        let c = ConstructionParams::default();
        LemmaParams { gamma: c.gamma, delta: c.delta, eps: c.eps, seed: 0, trials: 200, exec: Exec::default() }
    }
}

impl LemmaParams {
    pub fn construction(&self) -> ConstructionParams {
        ConstructionParams { gamma: self.gamma, delta: self.delta, eps: self.eps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LemmaVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = "=")]
    Equal,
}

/// One claimed relation `value <relation> bound`. For inequalities the
/// margin is the signed gap and must exceed `tol`; for equalities the
/// margin is `tol - |value - bound|` and must be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub tol: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LemmaReport {
    pub id: String,
    pub params: LemmaParams,
    pub claim: String,
    pub quantities: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// Smallest check margin.
    pub margin: f64,
    /// Smallest uniqueness gap among the solves where uniqueness is claimed.
    pub uniqueness_gap: Option<f64>,
    pub flags: Vec<String>,
    pub diagnostics: Vec<String>,
    pub verdict: LemmaVerdict,
    /// Wall time; left out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.verdict == LemmaVerdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

struct Builder {
    report: LemmaReport,
}

impl Builder {
    fn new(id: &str, params: &LemmaParams, claim: &str) -> Self {
        Builder {
            report: LemmaReport {
                id: id.to_string(),
                params: *params,
                claim: claim.to_string(),
                quantities: BTreeMap::new(),
                checks: Vec::new(),
                margin: f64::INFINITY,
                uniqueness_gap: None,
                flags: Vec::new(),
                diagnostics: Vec::new(),
                verdict: LemmaVerdict::Fail,
                runtime: Duration::ZERO,
            },
        }
    }

    fn quantity(&mut self, name: impl Into<String>, v: f64) {
        self.report.quantities.insert(name.into(), v);
    }

    fn check(&mut self, name: impl Into<String>, value: f64, relation: Relation, bound: f64, tol: f64) {
        let raw = match relation {
            Relation::Less => bound - value,
            Relation::Greater => value - bound,
            Relation::Equal => tol - (value - bound).abs(),
        };
        let margin = if raw.is_nan() { f64::NEG_INFINITY } else { raw };
        let pass = match relation {
            Relation::Equal => margin > 0.0,
            _ => margin > tol,
        };
        self.report.checks.push(Check { name: name.into(), value, relation, bound, tol, margin, pass });
    }

    fn less(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.check(name, value, Relation::Less, bound, 0.0);
    }

    fn greater(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.check(name, value, Relation::Greater, bound, 0.0);
    }

    fn equal(&mut self, name: impl Into<String>, value: f64, bound: f64, tol: f64) {
        self.check(name, value, Relation::Equal, bound, tol);
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.equal(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.5);
    }

    fn gap(&mut self, name: &str, gap: Option<f64>) {
        let g = gap.unwrap_or(f64::INFINITY);
        self.quantity(format!("{name} gap"), g);
        self.greater(format!("{name} unique"), g, UNIQUENESS_GAP);
        self.report.uniqueness_gap = Some(self.report.uniqueness_gap.map_or(g, |u| u.min(g)));
    }

    fn flag(&mut self, f: &str) {
        if !self.report.flags.iter().any(|x| x == f) {
            self.report.flags.push(f.to_string());
        }
    }

    /// MST/2 <= length <= MST for a tree on finitely many points.
    fn sandwich(&mut self, name: &str, points: &[Point3], length: f64) -> Result<()> {
        let mst = minimum_spanning_tree(points)?.length;
        self.greater(format!("{name} >= MST/2"), length, mst / 2.0);
        self.check(format!("{name} <= MST"), length, Relation::Less, mst + LENGTH_TOL, 0.0);
        Ok(())
    }

    fn finish(mut self, outcome: Result<()>, started: Instant) -> LemmaReport {
        if let Err(e) = outcome {
            self.report.diagnostics.push(e.to_string());
        }
        let r = &mut self.report;
        r.margin = r.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        r.verdict = if r.diagnostics.is_empty() && !r.checks.is_empty() && r.checks.iter().all(|c| c.pass) {
            LemmaVerdict::Pass
        } else {
            LemmaVerdict::Fail
        };
        r.runtime = started.elapsed();
        self.report
    }
}

fn claim_of(id: &str) -> Option<&'static str> {
    Some(match id {
        "four" => "a minimal tree on four consecutive hexagon vertices is three hexagon edges",
        "five" => "a minimal tree on five hexagon vertices is four hexagon edges; the alternatives are longer",
        "hexa" => "the minimal graph for Q with a1, c1, a2, c2 is four hexagon edges",
        "q-graph" => "small Hausdorff perturbations of that set keep the minimal graph near four hexagon edges",
        "x" => "a tree joining a horizontal circle to two points of the xz-plane lies in the xz-plane",
        "one-x" => "with c1, c2 pulled in by gamma the minimal graph is two triods, strictly shorter than the other cases",
        "split" => "e_i, f_i (and a_i) hang on the circle by one tree attached in the xz-plane at b_i",
        "splitfinal" => "the minimal graph for Q with a_i, e_i, f_i is the two trees attached at b1 and b2",
        "circles" => "the triod length on a2, v, c2(gamma) decreases strictly as v leaves b2 along the circle",
        "splitcircle" => "the tree length on a2, v, e2, f2 decreases strictly as v leaves b2 along the circle",
        "model" => "replacing Q by the arc M moves the attachments to the arc endpoints d1, d2",
        "theorem" => "the tree on X is the two end clusters joined by the chain, locally minimal and knotted",
        _ => return None,
    })
}

/// Runs one lemma check. Unknown ids are an error; solver failures are
/// recorded in the report as FAIL with a diagnostic.
pub fn verify(id: &str, params: &LemmaParams) -> Result<LemmaReport> {
    let claim = claim_of(id).ok_or_else(|| Error::UnknownLemma(id.to_string()))?;
    let started = Instant::now();
    let mut b = Builder::new(id, params, claim);
    let opts = OptOptions { exec: params.exec, ..OptOptions::default() };
    let outcome = match id {
        "four" => four(&mut b, &opts),
        "five" => five(&mut b, &opts),
        "hexa" => hexa(&mut b, &opts),
        "q-graph" => q_graph(&mut b, params, &opts),
        "x" => lemma_x(&mut b, params, &opts),
        "one-x" => one_x(&mut b, params, &opts),
        "split" => split(&mut b, params, &opts),
        "splitfinal" => splitfinal(&mut b, params, &opts),
        "circles" => circles(&mut b, params, &opts, false),
        "splitcircle" => circles(&mut b, params, &opts, true),
        "model" => model(&mut b, params, &opts),
        "theorem" => theorem(&mut b, params, &opts),
        _ => unreachable!("claim_of covers every id"),
    };
    Ok(b.finish(outcome, started))
}

/// Every lemma in [`LEMMA_IDS`] order; lemmas run concurrently.
pub fn verify_all(params: &LemmaParams) -> Vec<LemmaReport> {
    params.exec.map(&LEMMA_IDS, |id| verify(id, params).expect("known lemma id"))
}

// ---------------------------------------------------------------------
// Shared geometry

const HEX_ORDER: [&str; 6] = ["a1", "b1", "c1", "a2", "b2", "c2"];

fn hex(l: &str) -> Point3 {
    hexagon_vertices().at(l)
}

fn hexagon_edges() -> Vec<Segment> {
    (0..6).map(|i| Segment::new(hex(HEX_ORDER[i]), hex(HEX_ORDER[(i + 1) % 6]))).collect()
}

/// Largest distance from the graph to the union of `segs`.
fn distance_into(g: &EmbeddedGraph, segs: &[Segment]) -> f64 {
    g.sample(0.01)
        .into_iter()
        .map(|p| segs.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn max_abs_y(g: &EmbeddedGraph) -> f64 {
    g.vertices.iter().map(|v| v.xyz.y.abs()).fold(0.0, f64::max)
}

fn with_curve(points: &[(&str, Point3)], label: &str, c: Continuum) -> Result<TerminalSet> {
    TerminalSet::new(points.iter().map(|(l, p)| (l.to_string(), *p)).collect(), vec![(label.to_string(), c)])
}

fn equator() -> Continuum {
    Continuum::Circle(Circle3::equator())
}

fn caps(slots: usize) -> ForestCaps {
    ForestCaps { max_slots_per_block: slots, ..ForestCaps::default() }
}

/// Attachment points of `g` with the index of the component they lie in.
fn attachments_by_component(g: &EmbeddedGraph) -> Vec<(usize, Point3)> {
    let comp = components(g);
    g.attachments.iter().map(|a| (comp[a.vertex], g.vertices[a.vertex].xyz)).collect()
}

fn components(g: &EmbeddedGraph) -> Vec<usize> {
    let adj = g.adjacency();
    let mut comp = vec![usize::MAX; g.vertices.len()];
    let mut next = 0;
    for s in 0..g.vertices.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Number of components of a forest that touch at least one edge or
/// point terminal (attachment vertices belong to their tree).
fn tree_count(g: &EmbeddedGraph) -> usize {
    let comp = components(g);
    let mut ids: Vec<usize> = g
        .vertices
        .iter()
        .filter(|v| v.role == Role::Terminal || g.degree(v.id) > 0)
        .map(|v| comp[v.id])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// min over v in the plane x = 0 of |T({v, a, b})|, returned with the
/// minimizing v and the branch point t. The optimal v is the foot of t,
/// so this is min over t of |t.x| + |t - a| + |t - b|, a convex function
/// minimized by smoothed Newton steps with a shrinking smoothing radius.
fn plane_tree(a: Point3, b: Point3) -> (f64, Point3, Point3) {
    let exact = |t: Point3| t.x.abs() + t.dist(a) + t.dist(b);
    let mut t = (a + b) / 3.0;
    for mu in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14] {
        let f = |t: Point3| -> f64 {
            (t.x * t.x + mu * mu).sqrt() + ((t - a).norm_sq() + mu * mu).sqrt() + ((t - b).norm_sq() + mu * mu).sqrt()
        };
        for _ in 0..200 {
            let mut grad = Vector3::zeros();
            let mut hess = Matrix3::zeros();
            for q in [a, b] {
                let d = t - q;
                let r = (d.norm_sq() + mu * mu).sqrt();
                let dv = Vector3::new(d.x, d.y, d.z);
                grad += dv / r;
                hess += (Matrix3::identity() - dv * dv.transpose() / (r * r)) / r;
            }
            let rx = (t.x * t.x + mu * mu).sqrt();
            grad.x += t.x / rx;
            hess[(0, 0)] += mu * mu / (rx * rx * rx);
            let Some(step) = hess.try_inverse().map(|h| h * grad) else { break };
            let f0 = f(t);
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-12 {
                let cand = t - Point3::new(step.x, step.y, step.z) * s;
                if f(cand) < f0 {
                    t = cand;
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            if !moved || step.norm() * s < 1e-16 {
                break;
            }
        }
    }
    (exact(t), Point3::new(0.0, t.y, t.z), t)
}

/// Intersection of the lines p + s u and q + r w in the xz-plane.
fn line_meet_xz(p: Point3, u: Point3, q: Point3, w: Point3) -> Option<Point3> {
    let det = u.x * (-w.z) - u.z * (-w.x);
    if det.abs() < 1e-15 {
        return None;
    }
    let (dx, dz) = (q.x - p.x, q.z - p.z);
    let s = (dx * (-w.z) - dz * (-w.x)) / det;
    Some(p + u * s)
}

fn distance_to_line(p: Point3, a: Point3, b: Point3) -> f64 {
    let u = (b - a).normalized().expect("distinct line points");
    let d = p - a;
    (d - u * d.dot(u)).norm()
}

// ---------------------------------------------------------------------
// Lemmas

fn four(b: &mut Builder, opts: &OptOptions) -> Result<()> {
    let edges = hexagon_edges();
    for i in 0..6 {
        let labels: Vec<&str> = (0..4).map(|k| HEX_ORDER[(i + k) % 6]).collect();
        let name = labels.join(",");
        let pts: Vec<Point3> = labels.iter().map(|l| hex(l)).collect();
        let sol = solve_minimal_tree(&pts, opts)?;
        b.quantity(format!("|T({name})|"), sol.length());
        b.equal(format!("|T({name})| = 3"), sol.length(), 3.0, LENGTH_TOL);
        b.less(format!("T({name}) within hexagon edges"), distance_into(&sol.graph, &edges), EDGE_SET_TOL);
        b.sandwich(&format!("|T({name})|"), &pts, sol.length())?;
    }
    Ok(())
}

fn five(b: &mut Builder, opts: &OptOptions) -> Result<()> {
    let edges = hexagon_edges();
    for skip in 0..6 {
        let labels: Vec<&str> = (0..6).filter(|&k| k != skip).map(|k| HEX_ORDER[k]).collect();
        let name = labels.join(",");
        let pts: Vec<Point3> = labels.iter().map(|l| hex(l)).collect();
        let sol = solve_minimal_tree(&pts, opts)?;
        b.quantity(format!("|T({name})|"), sol.length());
        b.equal(format!("|T({name})| = 4"), sol.length(), 4.0, LENGTH_TOL);
        b.less(format!("T({name}) within hexagon edges"), distance_into(&sol.graph, &edges), EDGE_SET_TOL);
        b.sandwich(&format!("|T({name})|"), &pts, sol.length())?;
    }

    // Terminals a1 b1 c1 a2 c2 are 0..5; Steiner nodes follow.
    let pts: Vec<Point3> = ["a1", "b1", "c1", "a2", "c2"].iter().map(|l| hex(l)).collect();
    let slots: Vec<TerminalSlot> = pts.iter().map(|&p| TerminalSlot::Point(p)).collect();

    // b1 a leaf on the hexagon edge [b1, a1]; two branch points elsewhere.
    let t = SteinerTopology::from_edges(5, 2, &[(0, 1), (0, 5), (4, 5), (5, 6), (2, 6), (3, 6)])?;
    let g = optimize_fixed_topology(&t, &slots, &[], &[], opts)?;
    b.quantity("b1-leaf candidate", g.length);
    b.equal("b1-leaf candidate = 1+2sqrt3", g.length, 1.0 + 2.0 * SQRT3, CONSTANT_TOL);
    b.greater("b1-leaf candidate > 4", g.length, 4.0);

    // No hexagon edge: K1 = [p, a2], p joined to q (a1, c2) and r (b1, c1).
    let t = SteinerTopology::from_edges(5, 3, &[(3, 5), (5, 6), (0, 6), (4, 6), (5, 7), (1, 7), (2, 7)])?;
    let g = optimize_fixed_topology(&t, &slots, &[], &[], opts)?;
    b.quantity("interior candidate", g.length);
    let adj = g.adjacency();
    let p = adj[3]
        .iter()
        .copied()
        .find(|&v| g.vertices[v].role == Role::Steiner)
        .ok_or_else(|| Error::InvalidGraph("interior candidate lost its branch point at a2".into()))?;
    let p = g.vertices[p].xyz;
    let (a1, c1, a2, c2) = (pts[0], pts[2], pts[3], pts[4]);
    let x = distance_to_line(p, c1, a2);
    let dir = a2 - c1;
    let p1 = line_meet_xz(p, dir, c1, a1 - c1).ok_or_else(|| Error::Degenerate("parallel lines".into()))?;
    let p2 = line_meet_xz(p, dir, c1, c2 - c1).ok_or_else(|| Error::Degenerate("parallel lines".into()))?;
    let (y1, y2) = (p1.dist(p), p2.dist(p));
    let bound = 2.5 * SQRT3 - x / 2.0 + SQRT3 / 2.0 * (y1 + y2);
    b.quantity("interior bound x", x);
    b.quantity("interior bound y1+y2", y1 + y2);
    b.quantity("interior bound", bound);
    b.equal("interior bound = 5sqrt3/2", bound, 2.5 * SQRT3, CONSTANT_TOL);
    b.check("interior candidate >= bound", g.length, Relation::Greater, bound, -CONSTANT_TOL);
    b.greater("interior bound > 4", bound, 4.0);
    Ok(())
}

fn hexa(b: &mut Builder, opts: &OptOptions) -> Result<()> {
    let labels = ["a1", "c1", "a2", "c2"];
    let pts: Vec<(&str, Point3)> = labels.iter().map(|l| (*l, hex(l))).collect();
    let ts = with_curve(&pts, "Q", equator())?;
    let sol = solve_minimal_graph(&ts, caps(2), opts)?;
    if sol.slot_cap_active {
        b.flag("slot-cap");
    }
    b.quantity("|G(A)|", sol.length());
    b.quantity("minimal graphs found", sol.ties.len() as f64);
    if sol.ties.len() > 1 {
        b.flag("ties");
    }
    b.equal("|G(A)| = 4", sol.length(), 4.0, LENGTH_TOL);
    let edges = hexagon_edges();
    for (i, g) in sol.ties.iter().enumerate() {
        b.less(format!("G(A) #{i} within hexagon edges"), distance_into(g, &edges), EDGE_SET_TOL);
    }

    let (a1, c2) = (hex("a1"), hex("c2"));
    let side = (7f64.sqrt() + SQRT3) / 2.0;
    for l in ["b4", "b5"] {
        let pts = [a1, c2, hex(l)];
        let t = solve_minimal_tree(&pts, opts)?;
        b.quantity(format!("|T(a1,c2,{l})|"), t.length());
        b.equal(format!("|T(a1,c2,{l})| = (sqrt7+sqrt3)/2"), t.length(), side, CONSTANT_TOL);
        b.greater(format!("|T(a1,c2,{l})| > 2"), t.length(), 2.0);
        b.sandwich(&format!("|T(a1,c2,{l})|"), &pts, t.length())?;
    }

    // Trapezoid case: min over v in the yz-plane of |T({v, c2, b3})| with
    // b3 on the quarter of Q from b2 to b4.
    let x = 7f64.sqrt() / 4.0;
    let b3 = Point3::new(x, (1.0 - x * x).sqrt(), 0.0);
    let (len, v0, t) = plane_tree(c2, b3);
    b.quantity("trapezoid b3.x", x);
    b.quantity("trapezoid min_v |T(v,c2,b3)|", len);
    b.quantity("trapezoid v0.y", v0.y);
    b.quantity("trapezoid v0.z", v0.z);
    b.equal("trapezoid value = 1/4+sqrt7/2", len, 0.25 + 7f64.sqrt() / 2.0, CONSTANT_TOL);
    // The leg from b3 to t is radial in the xy-plane: L(b3, t) meets the z-axis.
    let normal = Point3::new(0.0, 0.0, 1.0).cross(b3);
    b.less("trapezoid L(b3,t) meets z-axis", normal.dot(t).abs(), PLANE_TOL);
    let left = solve_minimal_tree(&[a1, hex("c1"), hex("a2")], opts)?.length();
    let mut worst = f64::INFINITY;
    for k in 0..=32 {
        let th = FRAC_PI_2 * k as f64 / 32.0;
        let b3 = Point3::new(th.cos(), th.sin(), 0.0);
        worst = worst.min(left + plane_tree(c2, b3).0);
    }
    b.quantity("trapezoid sweep min", worst);
    b.greater("trapezoid sweep > 4", worst, 4.0);
    Ok(())
}

/// A circle within Hausdorff distance about `d` of Q.
fn perturbed_circle(rng: &mut ChaCha8Rng, d: f64) -> Result<Circle3> {
    let center = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (d / 6.0);
    let radius = 1.0 + rng.gen_range(-1.0..1.0) * d / 4.0;
    let tilt = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0) * (d / 4.0);
    Circle3::new(center, radius, Point3::new(0.0, 0.0, 1.0) + tilt)
}

fn ball(rng: &mut ChaCha8Rng, r: f64) -> Point3 {
    loop {
        let p = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if p.norm() <= 1.0 {
            return p * r;
        }
    }
}

fn q_graph(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let edges = hexagon_edges();
    for d in [1e-3, 1e-2] {
        let eps = 10.0 * d;
        for trial in 0..2 {
            let circle = perturbed_circle(&mut rng, d)?;
            let dq = Continuum::Circle(circle).sample(720);
            let haus = crate::geometry::hausdorff_distance(&dq, &Continuum::Circle(Circle3::equator()).sample(720))?;
            let pts: Vec<(&str, Point3)> =
                ["a1", "c1", "a2", "c2"].iter().map(|l| (*l, hex(l) + ball(&mut rng, 0.9 * d))).collect();
            let ts = with_curve(&pts, "Q'", Continuum::Circle(circle))?;
            let sol = solve_minimal_graph(&ts, caps(2), opts)?;
            let tag = format!("delta={d:e} #{trial}");
            b.quantity(format!("{tag} circle Hausdorff"), haus);
            b.quantity(format!("{tag} |G(A)|"), sol.length());
            b.less(format!("{tag} circle within delta"), haus, d);
            b.less(format!("{tag} G(A) within eps of hexagon edges"), distance_into(&sol.graph, &edges), eps);
            b.less(format!("{tag} | |G(A)| - 4 |"), (sol.length() - 4.0).abs(), 4.0 * eps);
        }
    }
    Ok(())
}

fn lemma_x(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x78);
    let (eta, delta) = (1e-2, 1e-2);
    let near = [Segment::new(hex("a1"), hex("b1")), Segment::new(hex("a1"), hex("c2"))];
    let one_tree = ForestCaps { max_blocks: 1, max_slots_per_block: 1, ..ForestCaps::default() };
    for trial in 0..4 {
        let h = rng.gen_range(-1.0..1.0) * delta / 2.0;
        let mut planar = |p: Point3| {
            let d = ball(&mut rng, eta);
            p + Point3::new(d.x, 0.0, d.z)
        };
        let (a1, c2) = (planar(hex("a1")), planar(hex("c2")));
        let ts = with_curve(&[("a1'", a1), ("c2'", c2)], "Q_delta", Continuum::Circle(Circle3::horizontal(h)))?;
        let sol = solve_minimal_graph(&ts, one_tree, opts)?;
        let tag = format!("#{trial}");
        b.quantity(format!("{tag} height"), h);
        b.quantity(format!("{tag} |G(A)|"), sol.length());
        b.quantity(format!("{tag} distance to [a1,b1]+[a1,c2]"), distance_into(&sol.graph, &near));
        b.less(format!("{tag} max |y|"), max_abs_y(&sol.graph), PLANE_TOL);
    }
    Ok(())
}

/// One tree per block: the block's points plus attachments to Q started
/// at the listed hexagon vertices.
fn case_length(blocks: &[(&[&str], &[&str])], at: &dyn Fn(&str) -> Point3, opts: &OptOptions) -> Result<f64> {
    let q = Circle3::equator();
    let ts = with_curve(&[], "Q", equator())?;
    let mut total = 0.0;
    for (points, attach) in blocks {
        let mut slots: Vec<TerminalSlot> = points.iter().map(|l| TerminalSlot::Point(at(l))).collect();
        for l in attach.iter() {
            let init = q.closest_param(hex(l)).ok_or_else(|| Error::Degenerate("attachment on the axis".into()))?;
            slots.push(TerminalSlot::Attach { continuum: 0, init });
        }
        total += solve_block(&slots, &ts, opts)?.length;
    }
    Ok(total)
}

fn one_x(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let mut gammas: Vec<f64> = ONE_X_GAMMAS.to_vec();
    if !gammas.iter().any(|g| (g - params.gamma).abs() < 1e-15) {
        gammas.push(params.gamma);
    }
    for gamma in gammas {
        let s = split_points(gamma)?;
        let at = |l: &str| -> Point3 {
            match l {
                "c1" => s.at("c1(g)"),
                "c2" => s.at("c2(g)"),
                _ => hex(l),
            }
        };
        let tag = format!("gamma={gamma}");
        let pts: Vec<(&str, Point3)> = ["a1", "c1", "a2", "c2"].iter().map(|l| (*l, at(l))).collect();
        let ts = with_curve(&pts, "Q", equator())?;
        let sol = solve_minimal_graph(&ts, caps(2), opts)?;
        if sol.slot_cap_active {
            b.flag("slot-cap");
        }
        let g1 = sol.length();
        b.quantity(format!("{tag} |G(A)|"), g1);
        b.equal(format!("{tag} two trees"), tree_count(&sol.graph) as f64, 2.0, 0.5);
        b.equal(format!("{tag} two branch points"), sol.graph.steiner_count() as f64, 2.0, 0.5);
        b.less(format!("{tag} max |y|"), max_abs_y(&sol.graph), PLANE_TOL);
        for (_, v) in attachments_by_component(&sol.graph) {
            let near = v.dist(hex("b1")).min(v.dist(hex("b2")));
            b.less(format!("{tag} attachment at b1 or b2"), near, EDGE_SET_TOL);
        }
        b.gap(&tag, sol.uniqueness_gap());
        b.less(format!("{tag} |G(A)| < 4 - gamma"), g1, 4.0 - gamma);

        // The six four-edge patterns near H, each solved with its own
        // attachment sites.
        let case = |blocks: &[(&[&str], &[&str])]| case_length(blocks, &at, opts);
        let c1 = case(&[(&["a1", "c1"], &["b1"]), (&["a2", "c2"], &["b2"])])?;
        let c2 = case(&[(&["a1", "c2"], &["b1"]), (&["c1", "a2"], &["b2"])])?;
        let c3 = case(&[(&["a1", "c2"], &["b2"]), (&["a2", "c1"], &["b1"])])?;
        let c4 = case(&[(&["a1", "c1", "c2"], &["b1"]), (&["a2"], &["b2"])])?;
        let c5 = case(&[(&["a1", "c1", "a2"], &["b1"]), (&["c2"], &["b2"])])?;
        let c6 = case(&[(&["a1", "c1", "a2", "c2"], &["b1"])])?;
        for (i, c) in [c1, c2, c3, c4, c5, c6].iter().enumerate() {
            b.quantity(format!("{tag} case {} length", i + 1), *c);
        }
        b.equal(format!("{tag} case 1 is the optimum"), c1, g1, LENGTH_TOL);
        b.less(format!("{tag} case 1 < 4 - gamma"), c1, 4.0 - gamma);
        b.greater(format!("{tag} case 2 > 2(2 - gamma/2)"), c2, 2.0 * (2.0 - gamma / 2.0));
        b.greater(format!("{tag} case 3 > 2(1 + d(c2,b2))"), c3, 2.0 * (1.0 + at("c2").dist(hex("b2"))));
        b.greater(format!("{tag} case 4 > 4 - (sqrt3/2)gamma"), c4, 4.0 - SQRT3 / 2.0 * gamma);
        b.greater(format!("{tag} case 5 > case 1"), c5, c1);
        b.greater(format!("{tag} case 6 > case 1"), c6, c1);
        let runner_up = [c2, c3, c4, c5, c6].into_iter().fold(f64::INFINITY, f64::min);
        b.greater(format!("{tag} case gap"), runner_up - c1, UNIQUENESS_GAP);
    }
    Ok(())
}

fn split(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let s = split_points(params.gamma)?;
    for h in [0.0, 1e-3] {
        for i in 1..=2 {
            let (e, f) = (format!("e{i}"), format!("f{i}"));
            let bi = hex(&format!("b{i}"));
            let curve = Continuum::Circle(Circle3::horizontal(h));
            let foot = Point3::new(bi.x * (1.0 - h * h).sqrt(), 0.0, h);
            for with_a in [false, true] {
                let mut pts = vec![(e.as_str(), s.at(&e)), (f.as_str(), s.at(&f))];
                let a = format!("a{i}");
                if with_a {
                    pts.insert(0, (a.as_str(), hex(&a)));
                }
                let ts = with_curve(&pts, "Q_delta", curve.clone())?;
                let sol = solve_minimal_graph(&ts, caps(2), opts)?;
                let names: Vec<&str> = pts.iter().map(|p| p.0).collect();
                let tag = format!("h={h} {{{}}}", names.join(","));
                b.quantity(format!("{tag} |G|"), sol.length());
                b.equal(format!("{tag} one tree"), tree_count(&sol.graph) as f64, 1.0, 0.5);
                b.equal(format!("{tag} one attachment"), sol.graph.attachments.len() as f64, 1.0, 0.5);
                for (_, v) in attachments_by_component(&sol.graph) {
                    b.less(format!("{tag} attachment |y|"), v.y.abs(), PLANE_TOL);
                    b.less(format!("{tag} attachment at v_i"), v.dist(foot), EDGE_SET_TOL);
                }
                if !with_a {
                    b.equal(format!("{tag} triod"), sol.graph.steiner_count() as f64, 1.0, 0.5);
                }
                b.gap(&tag, sol.uniqueness_gap());
            }
        }
    }
    Ok(())
}

fn six_points(gamma: f64) -> Result<Vec<(String, Point3)>> {
    let s = split_points(gamma)?;
    Ok(["a1", "e1", "f1", "a2", "e2", "f2"]
        .iter()
        .map(|l| (l.to_string(), if l.starts_with('a') { hex(l) } else { s.at(l) }))
        .collect())
}

/// Shared by splitfinal and model: two trees, each holding a_i, e_i, f_i
/// and attached at the expected site.
fn two_trees(b: &mut Builder, ts: &TerminalSet, sites: [Point3; 2], opts: &OptOptions) -> Result<f64> {
    let sol = solve_minimal_graph(ts, caps(1), opts)?;
    b.flag("slot-cap");
    let g = &sol.graph;
    b.quantity("|G(A)|", sol.length());
    b.quantity("configurations", sol.configs_tried as f64);
    b.equal("two trees", tree_count(g) as f64, 2.0, 0.5);
    let comp = components(g);
    for i in 0..2 {
        let ids: Vec<usize> = (0..3).map(|k| 3 * i + k).collect();
        let same = ids.iter().all(|&v| comp[v] == comp[ids[0]]);
        b.holds(format!("a{0}, e{0}, f{0} in one tree", i + 1), same);
        let site = attachments_by_component(g).into_iter().find(|(c, _)| *c == comp[ids[0]]).map(|(_, v)| v);
        let miss = site.map_or(f64::INFINITY, |v| v.dist(sites[i]));
        b.quantity(format!("tree {} attachment offset", i + 1), miss);
        b.less(format!("tree {} attached at site", i + 1), miss, EDGE_SET_TOL);
    }
    b.gap("G(A)", sol.uniqueness_gap());
    Ok(sol.length())
}

fn splitfinal(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let ts = TerminalSet::new(six_points(params.gamma)?, vec![("Q".into(), equator())])?;
    let total = two_trees(b, &ts, [hex("b1"), hex("b2")], opts)?;
    let s = split_points(params.gamma)?;
    let q = Circle3::equator();
    let mut parts = 0.0;
    for i in 1..=2 {
        let bi = hex(&format!("b{i}"));
        let init = q.closest_param(bi).expect("b_i off the axis");
        let slots = [
            TerminalSlot::Point(hex(&format!("a{i}"))),
            TerminalSlot::Point(s.at(&format!("e{i}"))),
            TerminalSlot::Point(s.at(&format!("f{i}"))),
            TerminalSlot::Attach { continuum: 0, init },
        ];
        parts += solve_block(&slots, &ts, opts)?.length;
    }
    b.quantity("sum of the two trees", parts);
    b.equal("|G(A)| = sum of the two trees", total, parts, LENGTH_TOL);
    Ok(())
}

fn circles(b: &mut Builder, params: &LemmaParams, opts: &OptOptions, split_c2: bool) -> Result<()> {
    let s = split_points(params.gamma)?;
    let fixed: Vec<Point3> =
        if split_c2 { vec![hex("a2"), s.at("e2"), s.at("f2")] } else { vec![hex("a2"), s.at("c2(g)")] };
    let lengths: Vec<f64> = params
        .exec
        .map_range(SWEEP_POINTS, |k| {
            let th = -SWEEP_ANGLE * k as f64 / (SWEEP_POINTS - 1) as f64;
            let mut pts = fixed.clone();
            pts.insert(1, Point3::new(th.cos(), 0.0, th.sin()));
            solve_minimal_tree(&pts, opts).map(|t| (t.length(), pts))
        })
        .into_iter()
        .map(|r| {
            let (len, pts) = r?;
            b.sandwich("|T(v)|", &pts, len)?;
            Ok(len)
        })
        .collect::<Result<_>>()?;
    b.quantity("|T(b2)|", lengths[0]);
    b.quantity(format!("|T(v at {SWEEP_ANGLE} rad)|"), lengths[SWEEP_POINTS - 1]);
    let steps: Vec<f64> = lengths.windows(2).map(|w| w[1] - w[0]).collect();
    let worst = steps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let smallest = steps.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    b.quantity("largest successive difference", worst);
    b.quantity("smallest |successive difference|", smallest);
    b.less("successive differences negative", worst, -MONOTONE_TOL);
    let max_at = lengths.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map(|(i, _)| i).unwrap_or(0);
    b.holds("maximum at b2", max_at == 0);
    Ok(())
}

fn model(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let m = Continuum::Arcs(arc_m(params.delta)?);
    b.quantity("|M|", m.length());
    let ts = TerminalSet::new(six_points(params.gamma)?, vec![("M".into(), m)])?;
    let (d1, d2) = d_points(params.delta);
    two_trees(b, &ts, [d1, d2], opts)?;
    Ok(())
}

fn theorem(b: &mut Builder, params: &LemmaParams, opts: &OptOptions) -> Result<()> {
    let (x, named) = build_x(&params.construction())?;
    let n = named.n();
    b.quantity("n", n as f64);
    b.quantity("|X|", x.points.len() as f64);
    let spec = ClusterSpec::for_chain(n);
    let sol = solve_decomposed(&x, &spec, params.trials, params.seed, opts)?;
    let g = &sol.graph;
    b.quantity("|T(X)|", g.length);
    b.quantity("|T(A1)|", sol.head_length);
    b.quantity("|T(A2)|", sol.tail_length);
    b.quantity("chain length", sol.chain_length);
    b.equal(
        "|T(X)| = |T(A1)| + chain + |T(A2)|",
        g.length,
        sol.head_length + sol.chain_length + sol.tail_length,
        LENGTH_TOL,
    );
    let chain_ok = spec.chain.windows(2).all(|w| {
        let (u, v) = (x.index_of(&w[0]).unwrap_or(usize::MAX), x.index_of(&w[1]).unwrap_or(usize::MAX));
        g.edges.contains(&(u.min(v), u.max(v)))
    });
    b.holds("chain segments present", chain_ok);
    b.holds("tree", g.is_tree());
    b.equal("six branch points", g.steiner_count() as f64, 6.0, 0.5);
    let r = &sol.report;
    b.quantity("max direction sum", r.max_direction_sum);
    b.quantity("best improvement", r.best_improvement());
    b.quantity("trials", r.trials as f64);
    b.less("direction sums", r.max_direction_sum, DIRECTION_SUM_TOL);
    b.check("no improving perturbation", r.best_improvement(), Relation::Less, IMPROVEMENT_TOL, 0.0);
    b.holds("local optimality report", r.pass);
    b.sandwich("|T(X)|", &x.coords(), g.length)?;
    let rival = crossed_competitor(&x, opts)?;
    b.holds("competitor is a tree on X", rival.is_tree());
    b.quantity("crossed competitor", rival.length);
    b.less("|T(X)| < crossed competitor", g.length, rival.length);

    let mut labels: Vec<String> = x.points.iter().map(|p| p.0.clone()).collect();
    while labels.len() < g.vertices.len() {
        labels.push(format!("s{}", labels.len()));
    }
    let (cert, _) = certify(g, Some(&labels), params.seed, params.exec)?;
    b.quantity("knot determinant", cert.determinant as f64);
    b.quantity("crossings", cert.crossings as f64);
    b.holds("knotted", cert.verdict == Verdict::Knotted);
    Ok(())
}

/// A spanning tree of X that pairs each a_i with the split pair on the
/// other side: a1 with e2, f2 and a2 with e1, f1, each cluster joined to
/// the chain where it passes closest, and t1, tn hung on the nearest
/// non-adjacent chain point.
pub fn crossed_competitor(x: &TerminalSet, opts: &OptOptions) -> Result<EmbeddedGraph> {
    let id = |l: &str| x.index_of(l).ok_or_else(|| Error::InvalidGraph(format!("X has no `{l}`")));
    let n = (1..).take_while(|i| x.index_of(&format!("t{i}")).is_some()).count();
    if n < 8 {
        return Err(Error::Degenerate(format!("chain of {n} points is too short")));
    }
    let t: Vec<usize> = (1..=n).map(|i| id(&format!("t{i}"))).collect::<Result<_>>()?;
    let pos = |v: usize| x.points[v].1;
    // Chain positions 1..n-2 (t2..t(n-1)) form the path.
    let nearest = |p: Point3, skip: &[usize]| -> usize {
        (1..n - 1)
            .filter(|k| !skip.contains(k))
            .min_by(|&a, &b| pos(t[a]).dist(p).total_cmp(&pos(t[b]).dist(p)))
            .expect("chain is long enough")
    };
    let mut g = EmbeddedGraph::default();
    for (_, p) in &x.points {
        g.push_vertex(*p, Role::Terminal);
    }
    let mut cut = Vec::new();
    for (a, e, f) in [("a1", "e2", "f2"), ("a2", "e1", "f1")] {
        let (a, e, f) = (id(a)?, id(e)?, id(f)?);
        let foot = ((pos(e) + pos(f)) / 2.0).normalized().map(|c| Point3::new(c.x, c.y, 0.0));
        let foot = foot.and_then(|c| c.normalized()).ok_or_else(|| Error::Degenerate("split pair on the axis".into()))?;
        let k = nearest(foot, &[]);
        let k2 = if k + 1 < n - 1 { k + 1 } else { k - 1 };
        cut.push((k.min(k2), k.max(k2)));
        let ids = [a, e, f, t[k], t[k2]];
        let part = solve_minimal_tree(&ids.map(pos), opts)?.graph;
        let map: Vec<usize> = part
            .vertices
            .iter()
            .map(|v| if v.role == Role::Terminal { ids[v.id] } else { g.push_vertex(v.xyz, v.role) })
            .collect();
        g.edges.extend(part.edges.iter().map(|&(u, v)| (map[u].min(map[v]), map[u].max(map[v]))));
    }
    for k in 1..n - 2 {
        if !cut.contains(&(k, k + 1)) {
            g.edges.push((t[k].min(t[k + 1]), t[k].max(t[k + 1])));
        }
    }
    for (end, skip) in [(0, [1, 2, 3]), (n - 1, [n - 2, n - 3, n - 4])] {
        let j = nearest(pos(t[end]), &skip);
        g.edges.push((t[end].min(t[j]), t[end].max(t[j])));
    }
    g.edges.sort_unstable();
    g.recompute_length();
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_tree_degenerate_cases() {
        // Both points on the plane: the segment between them.
        let (len, _, _) = plane_tree(Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0));
        assert!((len - 1.0).abs() < 1e-10, "{len}");
        // Mirror points across the plane: the straight segment crosses it.
        let (len, v, _) = plane_tree(Point3::new(1.0, 0.3, 0.0), Point3::new(-1.0, 0.3, 0.0));
        assert!((len - 2.0).abs() < 1e-10, "{len}");
        assert!((v.y - 0.3).abs() < 1e-6);
    }

    #[test]
    fn unknown_id_is_an_error() {
        assert!(matches!(verify("nope", &LemmaParams::default()), Err(Error::UnknownLemma(_))));
    }

    #[test]
    fn builder_margins() {
        let mut b = Builder::new("t", &LemmaParams::default(), "");
        b.less("a", 1.0, 2.0);
        b.equal("b", 1.0, 1.0 + 1e-10, 1e-9);
        let r = b.finish(Ok(()), Instant::now());
        assert!(r.passed());
        assert!((r.margin - 9e-10).abs() < 1e-12);
        let mut b = Builder::new("t", &LemmaParams::default(), "");
        b.greater("a", 1.0, 1.0);
        assert!(!b.finish(Ok(()), Instant::now()).passed());
    }

    #[test]
    fn four_passes() {
        let r = verify("four", &LemmaParams::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failed_checks());
    }
}
