//! Euclidean Steiner minimal trees in three dimensions with point and
//! continuum terminals, the knotted minimal tree construction on the unit
//! sphere, numeric lemma checks, and knot certification of computed trees.

pub mod cli;
pub mod construction;
pub mod continuum;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod graph;
pub mod knot;
pub mod lemmas;
pub mod opt;
pub mod topology;

pub use error::{Error, Result};
pub use geometry::Point3;
pub use graph::{EmbeddedGraph, Role};
