//! Knot certificates: exterior closures of tree paths, generic diagrams and
//! Alexander polynomials.

mod certify;
mod curve;
mod diagram;
mod poly;

pub use certify::{certify, closure_polynomial, KnotCertificate, PairResult, Verdict, PLANAR_TOL};
pub use curve::{coplanarity_defect, exterior_closure, leaf_path, segment_distance, PolygonalCurve, APEX};
pub use diagram::{view_direction, Crossing, KnotDiagram};
pub use poly::{bareiss_determinant, IntPoly, LaurentPolynomial};
