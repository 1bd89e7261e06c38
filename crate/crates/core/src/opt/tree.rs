//! Fixed-topology optimization and the exhaustive point-terminal solver.

use crate::continuum::Continuum;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::Point3;
use crate::graph::{Attachment, EmbeddedGraph, Role};
use crate::topology::{enumerate_full_topologies_capped, SteinerTopology, DEFAULT_TERMINAL_CAP};

use super::newton::{NewtonSettings, Node, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct OptOptions {
    pub exec: Exec,
    pub newton: NewtonSettings,
    pub terminal_cap: usize,
    /// Solutions within this length of the optimum are ties.
    pub tie_tol: f64,
    /// Edges shorter than this are contracted in reported graphs.
    pub contract_tol: f64,
    /// Hausdorff distance above which two solutions count as distinct.
    pub distinct_tol: f64,
    /// Edges shorter than this are tentatively collapsed; the collapse is
    /// kept when the re-solved graph is no longer.
    pub snap_tol: f64,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            exec: Exec::Parallel,
            newton: NewtonSettings::default(),
            terminal_cap: DEFAULT_TERMINAL_CAP,
            tie_tol: 1e-9,
            contract_tol: 1e-10,
            distinct_tol: 1e-6,
            snap_tol: 1e-6,
        }
    }
}

/// What sits at a terminal node of a topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalSlot {
    Point(Point3),
    /// Sliding attachment on a continuum, with its starting parameter.
    Attach { continuum: usize, init: f64 },
}

/// Jacobi-averaged starting positions for Steiner nodes.
fn initial_steiner(t: &SteinerTopology, anchors: &[Point3]) -> Vec<Point3> {
    let centroid = anchors.iter().copied().sum::<Point3>() / anchors.len() as f64;
    let adj = t.adjacency();
    let mut pos: Vec<Point3> = anchors.to_vec();
    for i in 0..t.k {
        // Small deterministic offsets keep Steiner nodes apart initially.
        let f = (i + 1) as f64;
        pos.push(centroid + Point3::new(1e-3 * f, -7e-4 * f, 5e-4 * f));
    }
    for _ in 0..30 {
        for v in t.n..t.node_count() {
            pos[v] = adj[v].iter().map(|&w| pos[w]).sum::<Point3>() / adj[v].len() as f64;
        }
    }
    pos[t.n..].to_vec()
}

/// Minimizes total length for a fixed topology; terminals are points or
/// sliding attachments. The result is contracted (edges shorter than
/// `contract_tol` merged) and, if anything was contracted, re-solved.
pub fn optimize_fixed_topology(
    t: &SteinerTopology,
    slots: &[TerminalSlot],
    curves: &[Continuum],
    curve_labels: &[String],
    opts: &OptOptions,
) -> Result<EmbeddedGraph> {
    if slots.len() != t.n {
        return Err(Error::InvalidTopology(format!("{} terminals for a topology on {}", slots.len(), t.n)));
    }
    t.validate()?;
    let anchors: Vec<Point3> = slots
        .iter()
        .map(|s| match *s {
            TerminalSlot::Point(p) => p,
            TerminalSlot::Attach { continuum, init } => curves[continuum].point(init),
        })
        .collect();
    let mut nodes: Vec<Node> = slots
        .iter()
        .map(|s| match *s {
            TerminalSlot::Point(p) => Node::Fixed(p),
            TerminalSlot::Attach { continuum, init } => Node::Attached { continuum, param: init },
        })
        .collect();
    nodes.extend(initial_steiner(t, &anchors).into_iter().map(Node::Free));
    let sol = Problem::new(nodes, t.edges.clone(), curves).solve(&opts.newton)?;

    let mut g = EmbeddedGraph::default();
    for (i, p) in sol.positions.iter().enumerate() {
        let role = if i >= t.n {
            Role::Steiner
        } else if matches!(slots[i], TerminalSlot::Point(_)) {
            Role::Terminal
        } else {
            Role::Attachment
        };
        g.push_vertex(*p, role);
    }
    for (i, s) in slots.iter().enumerate() {
        if let TerminalSlot::Attach { continuum, .. } = s {
            g.attachments.push(Attachment {
                vertex: i,
                continuum: curve_labels[*continuum].clone(),
                param: sol.params[i].expect("attached node has a parameter"),
            });
        }
    }
    g.edges = t.edges.clone();
    g.recompute_length();
    Ok(collapse_short_edges(g, curves, curve_labels, opts))
}

/// Contracts edges below `contract_tol` unconditionally and edges below
/// `snap_tol` when re-solving the contracted graph does not lengthen it.
pub(crate) fn collapse_short_edges(
    g: EmbeddedGraph,
    curves: &[Continuum],
    curve_labels: &[String],
    opts: &OptOptions,
) -> EmbeddedGraph {
    let mut g = g;
    for tol in [opts.contract_tol, opts.snap_tol] {
        let contracted = g.contract_short_edges(tol);
        if contracted.edges.len() == g.edges.len() {
            continue;
        }
        let resolved = reoptimize(&contracted, curves, curve_labels, &opts.newton).unwrap_or(contracted);
        if tol == opts.contract_tol || resolved.length <= g.length + 1e-11 {
            g = resolved;
        }
    }
    g
}

/// Problem nodes for an existing graph: terminals fixed, Steiner vertices
/// free, attachment vertices sliding on their labeled continuum.
pub fn graph_nodes(g: &EmbeddedGraph, curve_labels: &[String]) -> Result<Vec<Node>> {
    g.vertices
        .iter()
        .map(|v| match v.role {
            Role::Terminal => Ok(Node::Fixed(v.xyz)),
            Role::Steiner => Ok(Node::Free(v.xyz)),
            Role::Attachment => {
                let a = g
                    .attachments
                    .iter()
                    .find(|a| a.vertex == v.id)
                    .ok_or_else(|| Error::InvalidGraph(format!("attachment vertex {} has no record", v.id)))?;
                let c = curve_labels
                    .iter()
                    .position(|l| *l == a.continuum)
                    .ok_or_else(|| Error::InvalidGraph(format!("unknown continuum `{}`", a.continuum)))?;
                Ok(Node::Attached { continuum: c, param: a.param })
            }
        })
        .collect()
}

/// Re-solves the geometry of `g` keeping its combinatorial structure.
pub fn reoptimize(
    g: &EmbeddedGraph,
    curves: &[Continuum],
    curve_labels: &[String],
    settings: &NewtonSettings,
) -> Result<EmbeddedGraph> {
    let nodes = graph_nodes(g, curve_labels)?;
    reoptimize_from(g, nodes, curves, settings)
}

pub(crate) fn reoptimize_from(
    g: &EmbeddedGraph,
    nodes: Vec<Node>,
    curves: &[Continuum],
    settings: &NewtonSettings,
) -> Result<EmbeddedGraph> {
    let sol = Problem::new(nodes, g.edges.clone(), curves).solve(settings)?;
    let mut out = g.clone();
    for (v, p) in out.vertices.iter_mut().zip(&sol.positions) {
        v.xyz = *p;
    }
    for a in out.attachments.iter_mut() {
        if let Some(t) = sol.params[a.vertex] {
            a.param = t;
        }
    }
    out.recompute_length();
    Ok(out)
}

/// Canonical topology encoding of a tree whose terminals are vertices
/// `0..n` (role terminal) and whose other vertices are Steiner points.
pub fn graph_encoding(g: &EmbeddedGraph) -> Result<String> {
    let n = g.count_role(Role::Terminal);
    if g.vertices[..n].iter().any(|v| v.role != Role::Terminal) {
        return Err(Error::InvalidGraph("terminals must come first".into()));
    }
    Ok(SteinerTopology::from_edges(n, g.vertices.len() - n, &g.edges)?.encoding)
}

#[derive(Debug, Clone)]
pub struct TreeSolution {
    /// The designated optimum (smallest encoding among ties).
    pub graph: EmbeddedGraph,
    pub encoding: String,
    /// All geometrically distinct solutions within `tie_tol`, primary first.
    pub ties: Vec<(String, EmbeddedGraph)>,
    /// Length of the best solution that is geometrically distinct from all ties.
    pub second_best: Option<f64>,
    pub topologies_tried: usize,
}

impl TreeSolution {
    pub fn length(&self) -> f64 {
        self.graph.length
    }

    pub fn uniqueness_gap(&self) -> Option<f64> {
        if self.ties.len() > 1 {
            return Some(0.0);
        }
        self.second_best.map(|s| s - self.graph.length)
    }
}

pub(crate) fn distinct(a: &EmbeddedGraph, b: &EmbeddedGraph, tol: f64) -> bool {
    a.hausdorff_to(b, 0.02) > tol
}

/// Minimal tree of a point set: best over all full topologies, whose
/// optima cover every degenerate closure via edge collapse.
pub fn solve_minimal_tree(points: &[Point3], opts: &OptOptions) -> Result<TreeSolution> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("solve_minimal_tree points"));
    }
    if n > opts.terminal_cap {
        return Err(Error::CapExceeded(format!(
            "{n} terminals exceed the exhaustive cap {}; use the decomposed solver",
            opts.terminal_cap
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].dist(points[j]) < 1e-12 {
                return Err(Error::Degenerate(format!("terminals {i} and {j} coincide")));
            }
        }
    }
    let topologies = match n {
        1 => vec![SteinerTopology::from_edges(1, 0, &[])?],
        2 => vec![SteinerTopology::from_edges(2, 0, &[(0, 1)])?],
        _ => enumerate_full_topologies_capped(n, opts.terminal_cap)?,
    };
    let slots: Vec<TerminalSlot> = points.iter().map(|&p| TerminalSlot::Point(p)).collect();
    let results = opts.exec.map(&topologies, |t| optimize_fixed_topology(t, &slots, &[], &[], opts));
    let mut solved = Vec::with_capacity(results.len());
    for r in results {
        let g = r?;
        let enc = graph_encoding(&g)?;
        solved.push((enc, g));
    }
    rank_solutions(solved, opts, topologies.len())
}

fn rank_solutions(mut solved: Vec<(String, EmbeddedGraph)>, opts: &OptOptions, tried: usize) -> Result<TreeSolution> {
    solved.sort_by(|a, b| a.1.length.total_cmp(&b.1.length).then_with(|| a.0.cmp(&b.0)));
    let best_len = solved[0].1.length;
    let mut ties: Vec<(String, EmbeddedGraph)> = Vec::new();
    let mut second_best = None;
    for (enc, g) in solved {
        if g.length <= best_len + opts.tie_tol {
            if ties.iter().all(|(e, t)| *e != enc && distinct(t, &g, opts.distinct_tol)) {
                ties.push((enc, g));
            }
        } else if ties.iter().all(|(_, t)| distinct(t, &g, opts.distinct_tol)) {
            second_best = Some(g.length);
            break;
        }
    }
    ties.sort_by(|a, b| a.0.cmp(&b.0));
    let (encoding, graph) = ties[0].clone();
    Ok(TreeSolution { graph, encoding, ties, second_best, topologies_tried: tried })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::enumerate_full_topologies;

    const S3: f64 = 1.7320508075688772;

    fn hexagon() -> [Point3; 6] {
        [
            Point3::new(-0.5, 0.0, S3 / 2.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(-0.5, 0.0, -S3 / 2.0),
            Point3::new(0.5, 0.0, -S3 / 2.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 0.0, S3 / 2.0),
        ]
    }

    fn pts(p: &[Point3]) -> Vec<TerminalSlot> {
        p.iter().map(|&x| TerminalSlot::Point(x)).collect()
    }

    #[test]
    fn equilateral_triod() {
        let tri = [Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), Point3::new(0.5, S3 / 2.0, 0.0)];
        let t = &enumerate_full_topologies(3).unwrap()[0];
        let g = optimize_fixed_topology(t, &pts(&tri), &[], &[], &OptOptions::default()).unwrap();
        assert!((g.length - S3).abs() < 1e-12);
    }

    #[test]
    fn square_topologies_tie() {
        let sq = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let opts = OptOptions::default();
        let lens: Vec<f64> = enumerate_full_topologies(4)
            .unwrap()
            .iter()
            .map(|t| optimize_fixed_topology(t, &pts(&sq), &[], &[], &opts).unwrap().length)
            .collect();
        let good: Vec<_> = lens.iter().filter(|l| (*l - (1.0 + S3)).abs() < 1e-10).collect();
        assert_eq!(good.len(), 2, "{lens:?}");
        let sol = solve_minimal_tree(&sq, &opts).unwrap();
        assert_eq!(sol.ties.len(), 2);
        assert!((sol.length() - (1.0 + S3)).abs() < 1e-10);
    }

    #[test]
    fn path_topology_needs_no_iterations() {
        let p = [Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 2.0, 0.0)];
        let t = SteinerTopology::from_edges(3, 0, &[(0, 1), (1, 2)]).unwrap();
        let g = optimize_fixed_topology(&t, &pts(&p), &[], &[], &OptOptions::default()).unwrap();
        assert_eq!(g.length, 3.0);
    }

    #[test]
    fn hexagon_lemma_values() {
        let h = hexagon();
        let opts = OptOptions::default();
        let four = solve_minimal_tree(&h[..4], &opts).unwrap();
        assert!((four.length() - 3.0).abs() < 1e-9, "{}", four.length());
        assert_eq!(four.graph.steiner_count(), 0);
        let five = solve_minimal_tree(&[h[0], h[1], h[2], h[3], h[5]], &opts).unwrap();
        assert!((five.length() - 4.0).abs() < 1e-9, "{}", five.length());
        assert_eq!(five.graph.edges.len(), 4);
        let two = solve_minimal_tree(&h[..2], &opts).unwrap();
        assert_eq!(two.graph.edges, vec![(0, 1)]);
    }

    #[test]
    fn random_initializations_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p: Vec<Point3> = (0..6).map(|_| Point3::new(rng.gen(), rng.gen(), rng.gen())).collect();
        let t = &enumerate_full_topologies(6).unwrap()[17];
        let opts = OptOptions::default();
        let reference = optimize_fixed_topology(t, &pts(&p), &[], &[], &opts).unwrap().length;
        for _ in 0..5 {
            let mut nodes: Vec<Node> = p.iter().map(|&x| Node::Fixed(x)).collect();
            for _ in 0..t.k {
                nodes.push(Node::Free(Point3::new(rng.gen(), rng.gen(), rng.gen()) * 3.0));
            }
            let l = Problem::new(nodes, t.edges.clone(), &[]).solve(&opts.newton).unwrap().length;
            assert!((l - reference).abs() < 1e-8, "{l} vs {reference}");
        }
    }
}
