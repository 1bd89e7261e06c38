//! Minimal connecting graphs for point terminals plus continua: every
//! forest configuration is solved block by block and the blocks reused
//! across configurations.

use std::collections::HashMap;

use crate::continuum::Continuum;
use crate::error::{Error, Result};
use crate::graph::{Attachment, EmbeddedGraph, Role};
use crate::topology::{enumerate_forest_configs, enumerate_full_topologies_capped, Block, ForestCaps, ForestConfig, SteinerTopology};

use super::terminals::TerminalSet;
use super::tree::{distinct, optimize_fixed_topology, OptOptions, TerminalSlot};

/// Distinct local optima kept per block.
const BLOCK_ALTERNATIVES: usize = 3;

#[derive(Debug, Clone)]
pub struct GraphSolution {
    pub graph: EmbeddedGraph,
    pub config: ForestConfig,
    /// Geometrically distinct solutions within `tie_tol` of the optimum.
    pub ties: Vec<EmbeddedGraph>,
    /// Best length among solutions distinct from every tie.
    pub second_best: Option<f64>,
    /// The optimum uses the maximum number of attachment slots in some block.
    pub slot_cap_active: bool,
    pub configs_tried: usize,
    pub block_solves: usize,
}

impl GraphSolution {
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

/// One fixed-topology solve inside a block.
struct Job {
    block: usize,
    topology: SteinerTopology,
    slots: Vec<TerminalSlot>,
}

/// Starting parameters for each slot: the closest points on its continuum
/// to the block's point terminals.
fn slot_inits(block: &Block, ts: &TerminalSet, curves: &[Continuum]) -> Vec<Vec<TerminalSlot>> {
    let per_slot: Vec<Vec<f64>> = block
        .slots
        .iter()
        .map(|&c| {
            let mut params: Vec<f64> = Vec::new();
            for &p in &block.points {
                if let Ok(t) = curves[c].closest_param(ts.points[p].1) {
                    if params.iter().all(|q| (q - t).abs() > 1e-9) {
                        params.push(t);
                    }
                }
            }
            if params.is_empty() {
                params.push(0.0);
            }
            params
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; block.slots.len()];
    loop {
        // Same-continuum slots are interchangeable: keep nondecreasing choices.
        let ordered = (1..idx.len()).all(|i| block.slots[i] != block.slots[i - 1] || idx[i] >= idx[i - 1]);
        if ordered {
            let mut slots = Vec::with_capacity(idx.len());
            for (i, &k) in idx.iter().enumerate() {
                let c = block.slots[i];
                let mut init = per_slot[i][k];
                if i > 0 && block.slots[i - 1] == c && idx[i - 1] == k {
                    init += 1e-3;
                }
                slots.push(TerminalSlot::Attach { continuum: c, init: curves[c].normalize_param(init) });
            }
            out.push(slots);
        }
        let mut i = 0;
        while i < idx.len() {
            idx[i] += 1;
            if idx[i] < per_slot[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            break;
        }
    }
    out
}

fn block_topologies(m: usize, cap: usize) -> Result<Vec<SteinerTopology>> {
    match m {
        0 => Err(Error::Empty("block without terminals")),
        1 => Ok(vec![SteinerTopology::from_edges(1, 0, &[])?]),
        2 => Ok(vec![SteinerTopology::from_edges(2, 0, &[(0, 1)])?]),
        _ => enumerate_full_topologies_capped(m, cap),
    }
}

/// Places block graphs into one graph: point terminals first in terminal
/// set order, then each block's other vertices.
fn assemble(ts: &TerminalSet, blocks: &[(&Block, &EmbeddedGraph)]) -> EmbeddedGraph {
    let mut g = EmbeddedGraph::default();
    for (_, p) in &ts.points {
        g.push_vertex(*p, Role::Terminal);
    }
    for (block, bg) in blocks {
        let mut map = vec![usize::MAX; bg.vertices.len()];
        for v in &bg.vertices {
            map[v.id] = if v.role == Role::Terminal {
                // Terminals keep their block order, which matches `block.points`.
                let k = bg.vertices[..v.id].iter().filter(|u| u.role == Role::Terminal).count();
                block.points[k]
            } else {
                g.push_vertex(v.xyz, v.role)
            };
        }
        g.edges.extend(bg.edges.iter().map(|&(a, b)| (map[a].min(map[b]), map[a].max(map[b]))));
        g.attachments.extend(bg.attachments.iter().map(|a| Attachment { vertex: map[a.vertex], ..a.clone() }));
    }
    g.edges.sort_unstable();
    g.recompute_length();
    g
}

/// Minimal connecting graph over all forest configurations.
pub fn solve_minimal_graph(ts: &TerminalSet, caps: ForestCaps, opts: &OptOptions) -> Result<GraphSolution> {
    let n = ts.points.len();
    let curves = ts.curves();
    let labels = ts.curve_labels();
    if curves.is_empty() && n == 0 {
        return Err(Error::Empty("solve_minimal_graph terminals"));
    }
    let configs = enumerate_forest_configs(n, curves.len(), caps)?;
    if configs.is_empty() {
        return Err(Error::InvalidTopology("no admissible forest configuration".into()));
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut block_index: HashMap<Block, usize> = HashMap::new();
    for cfg in &configs {
        for b in &cfg.blocks {
            if !block_index.contains_key(b) {
                block_index.insert(b.clone(), blocks.len());
                blocks.push(b.clone());
            }
        }
    }
    let mut jobs = Vec::new();
    for (bi, b) in blocks.iter().enumerate() {
        let tops = block_topologies(b.terminal_count(), caps.max_block_terminals.max(opts.terminal_cap))?;
        for attach in slot_inits(b, ts, &curves) {
            let mut slots: Vec<TerminalSlot> = b.points.iter().map(|&p| TerminalSlot::Point(ts.points[p].1)).collect();
            slots.extend(attach);
            for t in &tops {
                jobs.push(Job { block: bi, topology: t.clone(), slots: slots.clone() });
            }
        }
    }
    let results = opts
        .exec
        .map(&jobs, |j| optimize_fixed_topology(&j.topology, &j.slots, &curves, &labels, opts));
    let mut per_block: Vec<Vec<EmbeddedGraph>> = vec![Vec::new(); blocks.len()];
    for (j, r) in jobs.iter().zip(results) {
        per_block[j.block].push(r?);
    }
    // Distinct local optima per block, shortest first.
    let per_block: Vec<Vec<EmbeddedGraph>> = per_block
        .into_iter()
        .map(|mut v| {
            v.sort_by(|a, b| a.length.total_cmp(&b.length));
            let mut kept: Vec<EmbeddedGraph> = Vec::new();
            for g in v {
                if kept.len() == BLOCK_ALTERNATIVES {
                    break;
                }
                if kept.iter().all(|k| distinct(k, &g, opts.distinct_tol)) {
                    kept.push(g);
                }
            }
            kept
        })
        .collect();

    // Candidates: each config with its best blocks, and with one block
    // swapped for its next local optimum.
    let mut candidates: Vec<(f64, usize, Vec<usize>)> = Vec::new();
    for (ci, cfg) in configs.iter().enumerate() {
        let ids: Vec<usize> = cfg.blocks.iter().map(|b| block_index[b]).collect();
        let choice = vec![0usize; ids.len()];
        let total = |c: &[usize]| ids.iter().zip(c).map(|(&b, &k)| per_block[b][k].length).sum::<f64>();
        candidates.push((total(&choice), ci, choice.clone()));
        for (pos, &b) in ids.iter().enumerate() {
            for k in 1..per_block[b].len() {
                let mut c = choice.clone();
                c[pos] = k;
                candidates.push((total(&c), ci, c));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let build = |ci: usize, choice: &[usize]| -> EmbeddedGraph {
        let cfg = &configs[ci];
        let parts: Vec<(&Block, &EmbeddedGraph)> =
            cfg.blocks.iter().zip(choice).map(|(b, &k)| (b, &per_block[block_index[b]][k])).collect();
        assemble(ts, &parts)
    };
    let best_len = candidates[0].0;
    let mut ties: Vec<(usize, EmbeddedGraph)> = Vec::new();
    let mut second_best = None;
    for (len, ci, choice) in &candidates {
        let g = build(*ci, choice);
        if *len <= best_len + opts.tie_tol {
            if ties.iter().all(|(_, t)| distinct(t, &g, opts.distinct_tol)) {
                ties.push((*ci, g));
            }
        } else if ties.iter().all(|(_, t)| distinct(t, &g, opts.distinct_tol)) {
            second_best = Some(*len);
            break;
        }
    }
    let (ci, graph) = ties[0].clone();
    let config = configs[ci].clone();
    let slot_cap_active = config.blocks.iter().any(|b| b.slots.len() >= caps.max_slots_per_block && !curves.is_empty());
    Ok(GraphSolution {
        graph,
        config,
        ties: ties.into_iter().map(|t| t.1).collect(),
        second_best,
        slot_cap_active,
        configs_tried: configs.len(),
        block_solves: jobs.len(),
    })
}

/// Shortest tree over all full topologies on the given terminal slots,
/// with attachments started at the caller's parameters. Used for
/// constrained sub-solves where the attachment site is prescribed.
pub fn solve_block(slots: &[TerminalSlot], ts: &TerminalSet, opts: &OptOptions) -> Result<EmbeddedGraph> {
    let curves = ts.curves();
    let labels = ts.curve_labels();
    let tops = block_topologies(slots.len(), opts.terminal_cap)?;
    let results = opts.exec.map(&tops, |t| optimize_fixed_topology(t, slots, &curves, &labels, opts));
    let mut best: Option<EmbeddedGraph> = None;
    for r in results {
        let g = r?;
        if best.as_ref().is_none_or(|b| g.length < b.length) {
            best = Some(g);
        }
    }
    best.ok_or(Error::Empty("solve_block terminals"))
}
