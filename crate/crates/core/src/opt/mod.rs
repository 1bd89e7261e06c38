//! Steiner tree optimization: fixed topologies, exhaustive and forest
//! solvers, decomposition along a chain, and local optimality checks.

mod decompose;
mod forest;
pub mod newton;
mod report;
mod terminals;
mod tree;

pub use terminals::TerminalSet;
pub use tree::{
    graph_encoding, graph_nodes, optimize_fixed_topology, reoptimize, solve_minimal_tree, OptOptions, TerminalSlot,
    TreeSolution,
};
pub use forest::{solve_block, solve_minimal_graph, GraphSolution};
pub use report::{local_optimality_report, OptimalityReport, DIRECTION_SUM_TOL, IMPROVEMENT_TOL, PERTURBATION_SCALES};
pub use decompose::{solve_decomposed, ClusterSpec, DecomposedSolution};
