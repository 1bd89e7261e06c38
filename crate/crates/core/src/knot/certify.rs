//! Knottedness certificates for trees with leaves on the unit sphere.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::graph::EmbeddedGraph;

use super::curve::{coplanarity_defect, exterior_closure, leaf_path, PolygonalCurve};
use super::diagram::KnotDiagram;
use super::poly::LaurentPolynomial;

pub const PLANAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Knotted,
    Inconclusive,
    PlanarUnknotted,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Knotted => "KNOTTED",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::PlanarUnknotted => "PLANAR-UNKNOTTED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KnotCertificate {
    pub leaf_pair: Option<[String; 2]>,
    pub gauss_code: String,
    pub alexander_coeffs: Vec<i64>,
    pub lowest_exp: i32,
    pub determinant: u128,
    pub verdict: Verdict,
    pub closure: String,
    pub crossings: usize,
    pub coplanarity_defect: f64,
    pub pairs_checked: usize,
}

/// Closure of one leaf pair with its diagram and polynomial.
#[derive(Debug, Clone)]
pub struct PairResult {
    pub leaves: (usize, usize),
    pub curve: PolygonalCurve,
    pub diagram: KnotDiagram,
    pub alexander: LaurentPolynomial,
}

/// Closes the tree path between two leaves outside the ball and computes
/// its Alexander polynomial from a seeded generic projection.
pub fn closure_polynomial(g: &EmbeddedGraph, p: usize, q: usize, seed: u64) -> Result<PairResult> {
    let ids = leaf_path(g, p, q)?;
    let path: Vec<_> = ids.iter().map(|&v| g.vertices[v].xyz).collect();
    let curve = exterior_closure(&path)?.simplified();
    let diagram = KnotDiagram::project(&curve, seed)?;
    let alexander = diagram.alexander_polynomial()?;
    Ok(PairResult { leaves: (p, q), curve, diagram, alexander })
}

fn label(labels: Option<&[String]>, v: usize) -> String {
    labels.and_then(|l| l.get(v).cloned()).unwrap_or_else(|| v.to_string())
}

/// Certificate for a tree: planar trees are unknotted; otherwise every leaf
/// pair is closed and the first nontrivial Alexander polynomial (in leaf
/// pair order) witnesses knottedness.
pub fn certify(g: &EmbeddedGraph, labels: Option<&[String]>, seed: u64, exec: Exec) -> Result<(KnotCertificate, Option<PairResult>)> {
    let pts: Vec<_> = g.vertices.iter().map(|v| v.xyz).collect();
    let defect = coplanarity_defect(&pts);
    if defect < PLANAR_TOL {
        return Ok((
            KnotCertificate {
                leaf_pair: None,
                gauss_code: String::new(),
                alexander_coeffs: vec![1],
                lowest_exp: 0,
                determinant: 1,
                verdict: Verdict::PlanarUnknotted,
                closure: "none: tree lies in a plane".into(),
                crossings: 0,
                coplanarity_defect: defect,
                pairs_checked: 0,
            },
            None,
        ));
    }
    let leaves = g.leaves();
    let pairs: Vec<(usize, usize)> =
        leaves.iter().enumerate().flat_map(|(i, &a)| leaves[i + 1..].iter().map(move |&b| (a, b))).collect();
    let results = exec.map(&pairs, |&(a, b)| closure_polynomial(g, a, b, seed));
    let mut results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let witness = results.iter().position(|r| !r.alexander.is_one());
    let verdict = if witness.is_some() { Verdict::Knotted } else { Verdict::Inconclusive };
    let chosen = match witness {
        Some(i) => Some(results.swap_remove(i)),
        None if !results.is_empty() => Some(results.swap_remove(0)),
        None => None,
    };
    let cert = match &chosen {
        Some(r) => KnotCertificate {
            leaf_pair: Some([label(labels, r.leaves.0), label(labels, r.leaves.1)]),
            gauss_code: r.diagram.gauss_code.clone(),
            alexander_coeffs: r.alexander.coeffs.clone(),
            lowest_exp: r.alexander.lowest_exp,
            determinant: r.alexander.determinant(),
            verdict,
            closure: "q -> 3q -> radius-3 great circles via (0,0,3) -> 3p -> p".into(),
            crossings: r.diagram.crossing_count(),
            coplanarity_defect: defect,
            pairs_checked: pairs.len(),
        },
        None => KnotCertificate {
            leaf_pair: None,
            gauss_code: String::new(),
            alexander_coeffs: vec![1],
            lowest_exp: 0,
            determinant: 1,
            verdict,
            closure: "none: fewer than two leaves".into(),
            crossings: 0,
            coplanarity_defect: defect,
            pairs_checked: 0,
        },
    };
    Ok((cert, chosen))
}
