//! Combinatorial search space: full Steiner topologies, their degenerate
//! contractions, and forest configurations for continuum terminals.
//!
//! Node ids: terminals are `0..n`, Steiner nodes `n..n+k`. Canonical
//! encodings root the tree at terminal 0 and list children in sorted
//! order, so two topologies are equal iff their encodings are equal
//! (Steiner nodes are unlabeled, terminals are labeled). A Steiner node
//! is written `(c1,c2,..)`, a terminal `i` or `i(c1,..)` when it has
//! children, and the root as `(0,c1,..)`, e.g. `(0,(1,2,3))`.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Default exhaustive cap on terminals per topology enumeration.
pub const DEFAULT_TERMINAL_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SteinerTopology {
    pub n: usize,
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
    pub encoding: String,
}

impl SteinerTopology {
    /// Canonicalizes an arbitrary tree on `n` terminals plus `k` Steiner nodes.
    pub fn from_edges(n: usize, k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let t = canonicalize(n, k, edges)?;
        t.validate()?;
        Ok(t)
    }

    pub fn node_count(&self) -> usize {
        self.n + self.k
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_steiner(&self, v: usize) -> bool {
        v >= self.n
    }

    pub fn is_full(&self) -> bool {
        let adj = self.adjacency();
        self.n >= 3
            && self.k + 2 == self.n
            && (0..self.n).all(|v| adj[v].len() == 1)
            && (self.n..self.node_count()).all(|v| adj[v].len() == 3)
    }

    /// Tree + degree invariant: connected, `n+k-1` edges, Steiner degree >= 3.
    pub fn validate(&self) -> Result<()> {
        let m = self.node_count();
        if self.n == 0 {
            return Err(Error::InvalidTopology("no terminals".into()));
        }
        if self.edges.len() + 1 != m {
            return Err(Error::InvalidTopology(format!("{} edges for {m} nodes", self.edges.len())));
        }
        let adj = self.adjacency();
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTopology("disconnected".into()));
        }
        if let Some(v) = (self.n..m).find(|&v| adj[v].len() < 3) {
            return Err(Error::InvalidTopology(format!("Steiner node {v} has degree {}", adj[v].len())));
        }
        Ok(())
    }
}

fn canonicalize(n: usize, k: usize, edges: &[(usize, usize)]) -> Result<SteinerTopology> {
    let m = n + k;
    if edges.len() + 1 != m || edges.iter().any(|&(a, b)| a >= m || b >= m || a == b) {
        return Err(Error::InvalidTopology("not a tree on the declared nodes".into()));
    }
    let mut adj = vec![Vec::new(); m];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // Post-order encodings rooted at terminal 0.
    let mut order = Vec::with_capacity(m);
    let mut parent = vec![usize::MAX; m];
    parent[0] = 0;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    if order.len() != m {
        return Err(Error::InvalidTopology("disconnected".into()));
    }
    let mut enc = vec![String::new(); m];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &v in order.iter().rev() {
        let mut ch: Vec<usize> = adj[v].iter().copied().filter(|&w| w != parent[v] || v == 0).collect();
        if v == 0 {
            ch.retain(|&w| parent[w] == 0 && w != 0);
        }
        ch.sort_by(|a, b| enc[*a].cmp(&enc[*b]));
        let joined = ch.iter().map(|&c| enc[c].as_str()).collect::<Vec<_>>().join(",");
        enc[v] = if v == 0 {
            if joined.is_empty() { "(0)".to_string() } else { format!("(0,{joined})") }
        } else if v >= n {
            format!("({joined})")
        } else if ch.is_empty() {
            v.to_string()
        } else {
            format!("{v}({joined})")
        };
        kids[v] = ch;
    }
    // Relabel Steiner nodes in pre-order of the sorted tree.
    let mut relabel: Vec<usize> = (0..m).collect();
    let mut next = n;
    let mut new_edges = Vec::with_capacity(m.saturating_sub(1));
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        if v >= n {
            relabel[v] = next;
            next += 1;
        }
        for &c in kids[v].iter().rev() {
            stack.push(c);
        }
    }
    for v in 0..m {
        for &c in &kids[v] {
            let (a, b) = (relabel[v], relabel[c]);
            new_edges.push((a.min(b), a.max(b)));
        }
    }
    new_edges.sort_unstable();
    Ok(SteinerTopology { n, k, edges: new_edges, encoding: enc[0].clone() })
}

/// All `(2n-5)!!` full Steiner topologies on `n` labeled terminals, in a
/// deterministic order.
pub fn enumerate_full_topologies(n: usize) -> Result<Vec<SteinerTopology>> {
    enumerate_full_topologies_capped(n, DEFAULT_TERMINAL_CAP)
}

pub fn enumerate_full_topologies_capped(n: usize, cap: usize) -> Result<Vec<SteinerTopology>> {
    if n < 3 {
        return Err(Error::OutOfRange(format!("full topologies need n >= 3, got {n}")));
    }
    if n > cap {
        return Err(Error::CapExceeded(format!("{n} terminals exceed exhaustive cap {cap}")));
    }
    let mut out = Vec::new();
    let mut edges = vec![(0, n), (1, n), (2, n)];
    grow(n, 3, &mut edges, &mut out);
    out.into_iter().map(|e| canonicalize(n, n - 2, &e)).collect()
}

fn grow(n: usize, next: usize, edges: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if next == n {
        out.push(edges.clone());
        return;
    }
    let s = n + next - 2;
    for i in 0..edges.len() {
        let (u, v) = edges[i];
        edges[i] = (u, s);
        edges.push((s, v));
        edges.push((next, s));
        grow(n, next + 1, edges, out);
        edges.pop();
        edges.pop();
        edges[i] = (u, v);
    }
}

/// Topologies obtained by contracting any subset of Steiner-incident edges
/// such that no two terminals merge; deduplicated, input first.
pub fn degenerate_closures(t: &SteinerTopology) -> Vec<SteinerTopology> {
    let candidates: Vec<usize> = (0..t.edges.len())
        .filter(|&i| t.is_steiner(t.edges[i].0) || t.is_steiner(t.edges[i].1))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let m = t.node_count();
    for mask in 0u64..(1u64 << candidates.len()) {
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut ok = true;
        for (bit, &ei) in candidates.iter().enumerate() {
            if mask >> bit & 1 == 0 {
                continue;
            }
            let (a, b) = t.edges[ei];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra < t.n && rb < t.n {
                ok = false;
                break;
            }
            // Keep the terminal (smaller id) as representative.
            let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[drop] = keep;
        }
        if !ok {
            continue;
        }
        let mut id = vec![usize::MAX; m];
        let mut next_steiner = t.n;
        for v in 0..m {
            let r = find(&mut parent, v);
            if r == v {
                id[v] = if v < t.n {
                    v
                } else {
                    next_steiner += 1;
                    next_steiner - 1
                };
            }
        }
        for v in 0..m {
            let r = find(&mut parent, v);
            id[v] = id[r];
        }
        let edges: Vec<(usize, usize)> = t
            .edges
            .iter()
            .map(|&(a, b)| (id[a], id[b]))
            .filter(|(a, b)| a != b)
            .collect();
        let k = next_steiner - t.n;
        if let Ok(c) = canonicalize(t.n, k, &edges) {
            if seen.insert(c.encoding.clone()) {
                out.push(c);
            }
        }
    }
    out
}

/// One block of a forest configuration: a set of point terminals and the
/// continua its attachment slots touch (a sorted multiset).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub points: Vec<usize>,
    pub slots: Vec<usize>,
}

impl Block {
    pub fn terminal_count(&self) -> usize {
        self.points.len() + self.slots.len()
    }
}

/// Partition of the point terminals into blocks with attachment slots. The
/// topology of each block is chosen by the solver from the full topologies
/// (and closures) on the block's points plus slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ForestConfig {
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestCaps {
    pub max_blocks: usize,
    pub max_slots_per_block: usize,
    pub max_block_terminals: usize,
}

impl Default for ForestCaps {
    fn default() -> Self {
        ForestCaps { max_blocks: usize::MAX, max_slots_per_block: 2, max_block_terminals: DEFAULT_TERMINAL_CAP }
    }
}

impl ForestConfig {
    /// Union of blocks plus continua is connected and blocks cover points.
    pub fn is_connected(&self, n_points: usize, n_continua: usize) -> bool {
        let mut covered = vec![0usize; n_points];
        for b in &self.blocks {
            for &p in &b.points {
                covered[p] += 1;
            }
        }
        if covered.iter().any(|&c| c != 1) {
            return false;
        }
        let nodes = self.blocks.len() + n_continua;
        if nodes == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            r
        }
        for (i, b) in self.blocks.iter().enumerate() {
            for &c in &b.slots {
                let (ra, rb) = (find(&mut parent, i), find(&mut parent, self.blocks.len() + c));
                parent[ra] = rb;
            }
        }
        let r0 = find(&mut parent, 0);
        (1..nodes).all(|v| find(&mut parent, v) == r0)
    }
}

/// All admissible forest configurations up to block order.
pub fn enumerate_forest_configs(n_points: usize, n_continua: usize, caps: ForestCaps) -> Result<Vec<ForestConfig>> {
    if n_points > caps.max_block_terminals && n_continua == 0 {
        return Err(Error::CapExceeded(format!("{n_points} points exceed cap {}", caps.max_block_terminals)));
    }
    if n_points == 0 {
        let empty = ForestConfig { blocks: vec![] };
        return Ok(if empty.is_connected(0, n_continua) && n_continua <= 1 { vec![empty] } else { vec![] });
    }
    let slot_sets = multisets(n_continua, caps.max_slots_per_block);
    let mut out = Vec::new();
    for partition in set_partitions(n_points) {
        if partition.len() > caps.max_blocks {
            continue;
        }
        let mut choice = vec![0usize; partition.len()];
        loop {
            let blocks: Vec<Block> = partition
                .iter()
                .zip(&choice)
                .map(|(p, &c)| Block { points: p.clone(), slots: slot_sets[c].clone() })
                .collect();
            let cfg = ForestConfig { blocks };
            let fits = cfg.blocks.iter().all(|b| b.terminal_count() <= caps.max_block_terminals);
            let lone_ok = cfg.blocks.iter().all(|b| !b.slots.is_empty()) || cfg.blocks.len() == 1;
            if fits && lone_ok && cfg.is_connected(n_points, n_continua) {
                out.push(cfg);
            }
            // Odometer over slot choices.
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < slot_sets.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Sorted multisets of continuum indices of size `0..=max`.
fn multisets(n_continua: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    if n_continua == 0 {
        return out;
    }
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for s in &frontier {
            let lo = s.last().copied().unwrap_or(0);
            for c in lo..n_continua {
                let mut t: Vec<usize> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Set partitions of `0..n` via restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == rgs.len() {
            let blocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
            let mut p = vec![Vec::new(); blocks];
            for (x, &b) in rgs.iter().enumerate() {
                p[b].push(x);
            }
            out.push(p);
            return;
        }
        for b in 0..=max + 1 {
            rgs[i] = b;
            rec(i + 1, max.max(b), rgs, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    rgs[0] = 0;
    rec(1, 0, &mut rgs, &mut out);
    out
}
