//! First-order residuals and perturbation/move tests around a computed graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::continuum::Continuum;
use crate::error::Result;
use crate::geometry::{three_point_minimal_tree, Point3, TWO_PI_OVER_3};
use crate::graph::{EmbeddedGraph, Role};

use super::newton::Node;
use super::terminals::TerminalSet;
use super::tree::{graph_nodes, reoptimize_from, OptOptions};

pub const PERTURBATION_SCALES: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
pub const IMPROVEMENT_TOL: f64 = 1e-9;
pub const DIRECTION_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub steiner_count: usize,
    /// Steiner vertices whose degree is not 3.
    pub degree_violations: usize,
    /// Largest norm of the sum of unit edge directions at a Steiner vertex.
    pub max_direction_sum: f64,
    pub max_angle_deviation: f64,
    /// Largest |u1 · (u2 × u3)| over Steiner vertices.
    pub max_coplanarity_defect: f64,
    /// Smallest angle between two edges at a terminal, if any terminal has degree ≥ 2.
    pub min_terminal_angle: Option<f64>,
    /// Largest |tangent · Σ unit directions| at an interior attachment.
    pub max_attachment_residual: f64,
    pub trials: usize,
    pub best_perturbation_improvement: f64,
    pub nni_moves: usize,
    pub best_nni_improvement: f64,
    pub split_moves: usize,
    pub best_split_improvement: f64,
    pub pass: bool,
}

impl OptimalityReport {
    pub fn best_improvement(&self) -> f64 {
        self.best_perturbation_improvement.max(self.best_nni_improvement).max(self.best_split_improvement)
    }
}

fn unit_dirs(g: &EmbeddedGraph, adj: &[Vec<usize>], v: usize) -> Vec<Point3> {
    let p = g.vertices[v].xyz;
    adj[v].iter().filter_map(|&w| (g.vertices[w].xyz - p).normalized()).collect()
}

fn angle(u: Point3, w: Point3) -> f64 {
    u.dot(w).clamp(-1.0, 1.0).acos()
}

fn perturbed(nodes: &[Node], curves: &[Continuum], scale: f64, rng: &mut ChaCha8Rng) -> Vec<Node> {
    nodes
        .iter()
        .map(|n| match *n {
            Node::Free(p) => {
                let d = loop {
                    let d = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if d.norm_sq() <= 1.0 {
                        break d;
                    }
                };
                Node::Free(p + d * scale)
            }
            Node::Attached { continuum, param } => {
                let t = param + scale * rng.gen_range(-1.0..1.0);
                Node::Attached { continuum, param: curves[continuum].normalize_param(t) }
            }
            fixed => fixed,
        })
        .collect()
}

/// Edge sets reachable by one nearest-neighbor interchange across each
/// Steiner–Steiner edge.
fn nni_neighbors(g: &EmbeddedGraph, adj: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let steiner = |v: usize| g.vertices[v].role == Role::Steiner;
    let mut out = Vec::new();
    for &(u, v) in &g.edges {
        if !(steiner(u) && steiner(v)) || adj[u].len() != 3 || adj[v].len() != 3 {
            continue;
        }
        let b = *adj[u].iter().find(|&&x| x != v).expect("degree 3");
        for &c in adj[v].iter().filter(|&&x| x != u) {
            let key = |a: usize, b: usize| (a.min(b), a.max(b));
            let edges = g
                .edges
                .iter()
                .map(|&(x, y)| match key(x, y) {
                    e if e == key(u, b) => key(v, b),
                    e if e == key(v, c) => key(u, c),
                    e => e,
                })
                .collect();
            out.push(edges);
        }
    }
    out
}

/// Residuals at Steiner, terminal and attachment vertices, plus `trials`
/// random perturb-and-reoptimize runs, one interchange per Steiner–Steiner
/// edge orientation and terminal split moves.
pub fn local_optimality_report(
    g: &EmbeddedGraph,
    ts: &TerminalSet,
    trials: usize,
    seed: u64,
    opts: &OptOptions,
) -> Result<OptimalityReport> {
    let curves = ts.curves();
    let labels = ts.curve_labels();
    let adj = g.adjacency();
    let mut rep = OptimalityReport {
        steiner_count: 0,
        degree_violations: 0,
        max_direction_sum: 0.0,
        max_angle_deviation: 0.0,
        max_coplanarity_defect: 0.0,
        min_terminal_angle: None,
        max_attachment_residual: 0.0,
        trials,
        best_perturbation_improvement: f64::NEG_INFINITY,
        nni_moves: 0,
        best_nni_improvement: f64::NEG_INFINITY,
        split_moves: 0,
        best_split_improvement: f64::NEG_INFINITY,
        pass: false,
    };
    let mut split_candidates = Vec::new();
    for v in &g.vertices {
        let dirs = unit_dirs(g, &adj, v.id);
        match v.role {
            Role::Steiner => {
                rep.steiner_count += 1;
                if dirs.len() != 3 {
                    rep.degree_violations += 1;
                    continue;
                }
                let sum = dirs.iter().copied().sum::<Point3>().norm();
                rep.max_direction_sum = rep.max_direction_sum.max(sum);
                for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                    let dev = (angle(dirs[i], dirs[j]) - TWO_PI_OVER_3).abs();
                    rep.max_angle_deviation = rep.max_angle_deviation.max(dev);
                }
                let cop = dirs[0].dot(dirs[1].cross(dirs[2])).abs();
                rep.max_coplanarity_defect = rep.max_coplanarity_defect.max(cop);
            }
            Role::Terminal => {
                for i in 0..dirs.len() {
                    for j in i + 1..dirs.len() {
                        let a = angle(dirs[i], dirs[j]);
                        rep.min_terminal_angle = Some(rep.min_terminal_angle.map_or(a, |m: f64| m.min(a)));
                        if a < TWO_PI_OVER_3 - 1e-9 {
                            split_candidates.push((v.id, adj[v.id][i], adj[v.id][j]));
                        }
                    }
                }
            }
            Role::Attachment => {
                let Some(a) = g.attachments.iter().find(|a| a.vertex == v.id) else { continue };
                let Some(c) = labels.iter().position(|l| *l == a.continuum) else { continue };
                if let Some((lo, hi)) = curves[c].bounds() {
                    if a.param <= lo + 1e-12 || a.param >= hi - 1e-12 {
                        continue;
                    }
                }
                if let Some(t) = curves[c].derivatives(a.param).0.normalized() {
                    let r = t.dot(dirs.iter().copied().sum::<Point3>()).abs();
                    rep.max_attachment_residual = rep.max_attachment_residual.max(r);
                }
            }
        }
    }

    let nodes = graph_nodes(g, &labels)?;
    let base = g.length;
    let improvements: Vec<Result<f64>> = opts.exec.map_range(trials, |j| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(j as u64));
        let start = perturbed(&nodes, &curves, PERTURBATION_SCALES[j % PERTURBATION_SCALES.len()], &mut rng);
        Ok(base - reoptimize_from(g, start, &curves, &opts.newton)?.length)
    });
    for r in improvements {
        rep.best_perturbation_improvement = rep.best_perturbation_improvement.max(r?);
    }

    let moves = nni_neighbors(g, &adj);
    rep.nni_moves = moves.len();
    let nni: Vec<Result<f64>> = opts.exec.map(&moves, |edges| {
        let mut h = g.clone();
        h.edges = edges.clone();
        Ok(base - reoptimize_from(&h, nodes.clone(), &curves, &opts.newton)?.length)
    });
    for r in nni {
        rep.best_nni_improvement = rep.best_nni_improvement.max(r?);
    }

    rep.split_moves = split_candidates.len();
    for (v, u1, u2) in split_candidates {
        let (pv, p1, p2) = (g.vertices[v].xyz, g.vertices[u1].xyz, g.vertices[u2].xyz);
        let t = three_point_minimal_tree(pv, p1, p2)?;
        rep.best_split_improvement = rep.best_split_improvement.max(pv.dist(p1) + pv.dist(p2) - t.length);
    }

    rep.pass = rep.degree_violations == 0
        && rep.max_direction_sum < DIRECTION_SUM_TOL
        && rep.max_attachment_residual < DIRECTION_SUM_TOL
        && rep.best_improvement() <= IMPROVEMENT_TOL;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::solve_minimal_tree;

    fn triangle() -> Vec<Point3> {
        let s3 = 3f64.sqrt();
        vec![Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), Point3::new(0.5, s3 / 2.0, 0.0)]
    }

    #[test]
    fn optimal_triod_passes() {
        let p = triangle();
        let opts = OptOptions::default();
        let sol = solve_minimal_tree(&p, &opts).unwrap();
        let rep = local_optimality_report(&sol.graph, &TerminalSet::from_points(&p), 20, 0, &opts).unwrap();
        assert!(rep.max_angle_deviation < 1e-9, "{rep:?}");
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn off_center_triod_fails() {
        let p = triangle();
        let opts = OptOptions::default();
        let mut g = solve_minimal_tree(&p, &opts).unwrap().graph;
        g.vertices[3].xyz = g.vertices[3].xyz + Point3::new(0.1, 0.0, 0.0);
        g.recompute_length();
        let rep = local_optimality_report(&g, &TerminalSet::from_points(&p), 10, 0, &opts).unwrap();
        assert!(!rep.pass);
        assert!(rep.best_perturbation_improvement > 1e-3);
    }

    #[test]
    fn bad_interchange_is_found() {
        // Pairing the long sides of a 1.1 x 1 rectangle costs 1 + 1.1√3;
        // the interchange to the short-side pairing costs 1.1 + √3.
        let r = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.1, 0.0, 0.0),
            Point3::new(1.1, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let opts = OptOptions::default();
        let t = crate::topology::SteinerTopology::from_edges(4, 2, &[(0, 4), (1, 4), (2, 5), (3, 5), (4, 5)]).unwrap();
        let slots: Vec<_> = r.iter().map(|&p| crate::opt::TerminalSlot::Point(p)).collect();
        let g = crate::opt::optimize_fixed_topology(&t, &slots, &[], &[], &opts).unwrap();
        let s3 = 3f64.sqrt();
        assert!((g.length - (1.0 + 1.1 * s3)).abs() < 1e-9);
        let rep = local_optimality_report(&g, &TerminalSet::from_points(&r), 5, 0, &opts).unwrap();
        assert_eq!(rep.nni_moves, 2);
        assert!((rep.best_nni_improvement - (1.0 + 1.1 * s3 - 1.1 - s3)).abs() < 1e-9, "{rep:?}");
        assert!(!rep.pass);
    }
}
