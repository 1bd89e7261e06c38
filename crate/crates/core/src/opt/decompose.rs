//! Trees for long chains: exact solves on the two end clusters joined by
//! the chain's consecutive segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EmbeddedGraph, Role};

use super::report::{local_optimality_report, OptimalityReport};
use super::terminals::TerminalSet;
use super::tree::{solve_minimal_tree, OptOptions};

/// Labels of the head cluster, the chain (in order) and the tail cluster.
/// The first and last chain labels may also belong to the clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub head: Vec<String>,
    pub chain: Vec<String>,
    pub tail: Vec<String>,
}

impl ClusterSpec {
    /// The split used for the constructed set X: {a1, t1, t2, e1, f1},
    /// the chain t2..t(n-1) and {a2, t(n-1), tn, e2, f2}.
    pub fn for_chain(n: usize) -> Self {
        let t = |i: usize| format!("t{i}");
        let s = |l: &str| l.to_string();
        ClusterSpec {
            head: vec![s("a1"), t(1), t(2), s("e1"), s("f1")],
            chain: (2..n).map(t).collect(),
            tail: vec![s("a2"), t(n - 1), t(n), s("e2"), s("f2")],
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecomposedSolution {
    pub graph: EmbeddedGraph,
    pub head_length: f64,
    pub tail_length: f64,
    pub chain_length: f64,
    pub report: OptimalityReport,
}

fn resolve(ts: &TerminalSet, labels: &[String]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| ts.index_of(l).ok_or_else(|| Error::InvalidGraph(format!("unknown terminal `{l}`"))))
        .collect()
}

/// Adds a cluster tree to `g`, mapping its terminals onto terminal set ids.
fn splice(g: &mut EmbeddedGraph, part: &EmbeddedGraph, ids: &[usize]) {
    let mut map = Vec::with_capacity(part.vertices.len());
    for v in &part.vertices {
        map.push(match v.role {
            Role::Terminal => ids[v.id],
            _ => g.push_vertex(v.xyz, v.role),
        });
    }
    g.edges.extend(part.edges.iter().map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b]))));
}

pub fn solve_decomposed(
    ts: &TerminalSet,
    spec: &ClusterSpec,
    trials: usize,
    seed: u64,
    opts: &OptOptions,
) -> Result<DecomposedSolution> {
    let head = resolve(ts, &spec.head)?;
    let chain = resolve(ts, &spec.chain)?;
    let tail = resolve(ts, &spec.tail)?;
    let mut covered = vec![0usize; ts.points.len()];
    for &i in head.iter().chain(&tail).chain(&chain) {
        covered[i] += 1;
    }
    let shared = |i: usize| chain.first() == Some(&i) || chain.last() == Some(&i);
    for (i, c) in covered.iter().enumerate() {
        let expected = if shared(i) && (head.contains(&i) || tail.contains(&i)) { 2 } else { 1 };
        if *c != expected {
            return Err(Error::InvalidGraph(format!(
                "terminal `{}` appears {c} times in the cluster split",
                ts.points[i].0
            )));
        }
    }
    let mut g = EmbeddedGraph::default();
    for (_, p) in &ts.points {
        g.push_vertex(*p, Role::Terminal);
    }
    let coords = ts.coords();
    let mut cluster_len = [0.0; 2];
    for (k, ids) in [&head, &tail].into_iter().enumerate() {
        if ids.is_empty() {
            continue;
        }
        let pts: Vec<_> = ids.iter().map(|&i| coords[i]).collect();
        let sol = solve_minimal_tree(&pts, opts)?;
        cluster_len[k] = sol.length();
        splice(&mut g, &sol.graph, ids);
    }
    g.edges.extend(chain.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))));
    g.recompute_length();
    let chain_length = chain.windows(2).map(|w| coords[w[0]].dist(coords[w[1]])).sum();
    let report = local_optimality_report(&g, ts, trials, seed, opts)?;
    Ok(DecomposedSolution { graph: g, head_length: cluster_len[0], tail_length: cluster_len[1], chain_length, report })
}
