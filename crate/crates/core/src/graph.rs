//! Embedded graphs (optimized trees and forests) and their JSON form.
//!
//! The JSON layout is fixed:
//! `{"vertices":[{"id","xyz","role"}],"edges":[[i,j]],"length":L,"attachments":[{"continuum","param"}]}`.
//! Attachment entries are listed in the order of the attachment-role
//! vertices.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Terminal,
    Steiner,
    Attachment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub xyz: Point3,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub vertex: usize,
    pub continuum: String,
    pub param: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddedGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
    pub length: f64,
    pub attachments: Vec<Attachment>,
}

#[derive(Serialize, Deserialize)]
struct AttachmentJson {
    continuum: String,
    param: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<Vertex>,
    edges: Vec<[usize; 2]>,
    length: f64,
    attachments: Vec<AttachmentJson>,
}

impl Serialize for EmbeddedGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            length: self.length,
            attachments: self
                .attachments
                .iter()
                .map(|a| AttachmentJson { continuum: a.continuum.clone(), param: a.param })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EmbeddedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GraphJson::deserialize(d)?;
        for (i, v) in j.vertices.iter().enumerate() {
            if v.id != i {
                return Err(serde::de::Error::custom(format!("vertex {i} has id {}", v.id)));
            }
        }
        let att_vertices: Vec<usize> =
            j.vertices.iter().filter(|v| v.role == Role::Attachment).map(|v| v.id).collect();
        if att_vertices.len() != j.attachments.len() {
            return Err(serde::de::Error::custom("attachment list does not match attachment vertices"));
        }
        Ok(EmbeddedGraph {
            attachments: att_vertices
                .into_iter()
                .zip(j.attachments)
                .map(|(vertex, a)| Attachment { vertex, continuum: a.continuum, param: a.param })
                .collect(),
            vertices: j.vertices,
            edges: j.edges.into_iter().map(|[a, b]| (a, b)).collect(),
            length: j.length,
        })
    }
}

impl EmbeddedGraph {
    pub fn push_vertex(&mut self, xyz: Point3, role: Role) -> usize {
        let id = self.vertices.len();
        self.vertices.push(Vertex { id, xyz, role });
        id
    }

    pub fn edge_length(&self, e: (usize, usize)) -> f64 {
        self.vertices[e.0].xyz.dist(self.vertices[e.1].xyz)
    }

    pub fn recompute_length(&mut self) {
        self.length = self.edges.iter().map(|&e| self.edge_length(e)).sum();
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v || e.1 == v).count()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn count_role(&self, role: Role) -> usize {
        self.vertices.iter().filter(|v| v.role == role).count()
    }

    pub fn steiner_count(&self) -> usize {
        self.count_role(Role::Steiner)
    }

    pub fn leaves(&self) -> Vec<usize> {
        let adj = self.adjacency();
        (0..self.vertices.len()).filter(|&v| adj[v].len() == 1).collect()
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.edges
            .iter()
            .map(|&(a, b)| Segment::new(self.vertices[a].xyz, self.vertices[b].xyz))
            .collect()
    }

    /// Points along all edges with spacing at most `step`, plus every vertex.
    pub fn sample(&self, step: f64) -> Vec<Point3> {
        let mut out: Vec<Point3> = self.vertices.iter().map(|v| v.xyz).collect();
        for s in self.segments() {
            let n = (s.length() / step).ceil().max(1.0) as usize;
            out.extend(s.sample(n));
        }
        out
    }

    /// Hausdorff distance between the point sets covered by two graphs
    /// (edges plus isolated vertices), sampled at `step` and measured
    /// exactly against the other graph's segments.
    pub fn hausdorff_to(&self, other: &EmbeddedGraph, step: f64) -> f64 {
        fn one_sided(a: &EmbeddedGraph, b: &EmbeddedGraph, step: f64) -> f64 {
            let segs = b.segments();
            let lone: Vec<Point3> = b.isolated_points();
            a.sample(step)
                .into_iter()
                .map(|p| {
                    segs.iter()
                        .map(|s| s.distance_to(p))
                        .chain(lone.iter().map(|q| q.dist(p)))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        }
        one_sided(self, other, step).max(one_sided(other, self, step))
    }

    /// Vertices without incident edges.
    pub fn isolated_points(&self) -> Vec<Point3> {
        let deg = self.adjacency();
        self.vertices.iter().filter(|v| deg[v.id].is_empty()).map(|v| v.xyz).collect()
    }

    /// Number of connected components among the vertices touched by edges
    /// plus isolated vertices.
    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices.len()];
        let mut count = 0;
        for s in 0..self.vertices.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut q = VecDeque::from([s]);
            seen[s] = true;
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        q.push_back(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_tree(&self) -> bool {
        !self.vertices.is_empty()
            && self.edges.len() + 1 == self.vertices.len()
            && self.component_count() == 1
    }

    /// Unique vertex path between `a` and `b` in a forest, if connected.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut prev = vec![usize::MAX; self.vertices.len()];
        prev[a] = a;
        let mut q = VecDeque::from([a]);
        while let Some(v) = q.pop_front() {
            if v == b {
                break;
            }
            for &w in &adj[v] {
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    q.push_back(w);
                }
            }
        }
        if prev[b] == usize::MAX {
            return None;
        }
        let mut out = vec![b];
        let mut v = b;
        while v != a {
            v = prev[v];
            out.push(v);
        }
        out.reverse();
        Some(out)
    }

    /// Checks ids, edge endpoints, length bookkeeping and acyclicity.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::InvalidGraph(format!("vertex {i} has id {}", v.id)));
            }
            if !v.xyz.is_finite() {
                return Err(Error::InvalidGraph(format!("vertex {i} is not finite")));
            }
        }
        for &(a, b) in &self.edges {
            if a >= self.vertices.len() || b >= self.vertices.len() || a == b {
                return Err(Error::InvalidGraph(format!("bad edge ({a},{b})")));
            }
        }
        let total: f64 = self.edges.iter().map(|&e| self.edge_length(e)).sum();
        if (total - self.length).abs() > 1e-12 * total.max(1.0) {
            return Err(Error::InvalidGraph(format!("length {} != edge sum {total}", self.length)));
        }
        if self.edges.len() + self.component_count() != self.vertices.len() {
            return Err(Error::InvalidGraph("graph has a cycle".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: EmbeddedGraph = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }

    /// Merges the endpoints of edges shorter than `tol`. Terminals absorb
    /// attachment and Steiner vertices, attachments absorb Steiner vertices.
    /// Vertex ids are compacted afterwards, preserving relative order.
    pub fn contract_short_edges(&self, tol: f64) -> EmbeddedGraph {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        let rank = |r: Role| match r {
            Role::Terminal => 2,
            Role::Attachment => 1,
            Role::Steiner => 0,
        };
        let mut rep_role: Vec<Role> = self.vertices.iter().map(|v| v.role).collect();
        for &(a, b) in &self.edges {
            if self.edge_length((a, b)) >= tol {
                continue;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                continue;
            }
            // Never merge two terminals.
            if rep_role[ra] == Role::Terminal && rep_role[rb] == Role::Terminal {
                continue;
            }
            let (keep, drop) = if rank(rep_role[ra]) >= rank(rep_role[rb]) { (ra, rb) } else { (rb, ra) };
            parent[drop] = keep;
            rep_role[keep] = if rank(rep_role[ra]) >= rank(rep_role[rb]) { rep_role[ra] } else { rep_role[rb] };
        }
        let mut new_id = vec![usize::MAX; n];
        let mut out = EmbeddedGraph::default();
        for v in 0..n {
            let r = find(&mut parent, v);
            if r == v {
                new_id[v] = out.push_vertex(self.vertices[v].xyz, self.vertices[v].role);
            }
        }
        for v in 0..n {
            let r = find(&mut parent, v);
            new_id[v] = new_id[r];
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| (new_id[a], new_id[b]))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        out.edges = edges;
        out.attachments = self
            .attachments
            .iter()
            .filter(|a| find(&mut parent, a.vertex) == a.vertex)
            .map(|a| Attachment { vertex: new_id[a.vertex], ..a.clone() })
            .collect();
        out.recompute_length();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triod() -> EmbeddedGraph {
        let mut g = EmbeddedGraph::default();
        g.push_vertex(Point3::new(1.0, 0.0, 0.0), Role::Terminal);
        g.push_vertex(Point3::new(-0.5, 0.8, 0.0), Role::Terminal);
        g.push_vertex(Point3::new(-0.5, -0.8, 0.0), Role::Terminal);
        g.push_vertex(Point3::new(1.0, 0.0, 1e-13), Role::Steiner);
        g.edges = vec![(0, 3), (1, 3), (2, 3)];
        g.recompute_length();
        g
    }

    #[test]
    fn json_layout_is_fixed() {
        let g = triod();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"vertices\":[{\"id\":0,\"xyz\":[1.0,0.0,0.0],\"role\":\"terminal\"}"));
        let e = s.find("\"edges\"").unwrap();
        let l = s.find("\"length\"").unwrap();
        let a = s.find("\"attachments\"").unwrap();
        assert!(e < l && l < a);
        let back = EmbeddedGraph::from_json(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn contraction_merges_steiner_into_terminal() {
        let g = triod().contract_short_edges(1e-9);
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.steiner_count(), 0);
        assert_eq!(g.edges, vec![(0, 1), (0, 2)]);
        assert!(g.is_tree());
        g.validate().unwrap();
    }

    #[test]
    fn validate_rejects_cycles_and_bad_length() {
        let mut g = triod();
        g.edges.push((0, 1));
        g.recompute_length();
        assert!(g.validate().is_err());
        let mut g = triod();
        g.length += 1.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn path_and_leaves() {
        let g = triod();
        assert_eq!(g.leaves(), vec![0, 1, 2]);
        assert_eq!(g.path(1, 2).unwrap(), vec![1, 3, 2]);
    }
}
