use std::collections::HashSet;

use crate::continuum::Continuum;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Labeled point terminals plus labeled continuum terminals.
#[derive(Debug, Clone, Default)]
pub struct TerminalSet {
    pub points: Vec<(String, Point3)>,
    pub continua: Vec<(String, Continuum)>,
}

impl TerminalSet {
    pub fn new(points: Vec<(String, Point3)>, continua: Vec<(String, Continuum)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for l in points.iter().map(|p| &p.0).chain(continua.iter().map(|c| &c.0)) {
            if !seen.insert(l.clone()) {
                return Err(Error::Degenerate(format!("duplicate terminal label `{l}`")));
            }
        }
        if let Some((l, _)) = points.iter().find(|(_, p)| !p.is_finite()) {
            return Err(Error::Degenerate(format!("terminal `{l}` is not finite")));
        }
        Ok(TerminalSet { points, continua })
    }

    pub fn from_points(points: &[Point3]) -> Self {
        TerminalSet {
            points: points.iter().enumerate().map(|(i, p)| (format!("p{i}"), *p)).collect(),
            continua: vec![],
        }
    }

    pub fn coords(&self) -> Vec<Point3> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn curves(&self) -> Vec<Continuum> {
        self.continua.iter().map(|c| c.1.clone()).collect()
    }

    pub fn curve_labels(&self) -> Vec<String> {
        self.continua.iter().map(|c| c.0.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p.0 == label)
    }

    /// Point terminals whose distance from the unit sphere exceeds `tol`.
    pub fn off_sphere(&self, tol: f64) -> Vec<String> {
        self.points
            .iter()
            .filter(|(_, p)| (p.norm() - 1.0).abs() > tol)
            .map(|(l, _)| l.clone())
            .collect()
    }
}
