//! Smoothed-length minimization over free Steiner positions and sliding
//! attachment parameters.
//!
//! Each edge contributes `sqrt(|e|^2 + mu^2)`; `mu` is driven down a
//! continuation schedule so collapsing edges stay differentiable. With all
//! attachments fixed the objective is convex in the Steiner positions; the
//! attachment parameters enter through the curve parameterization, so the
//! Hessian may be indefinite and is regularized Levenberg-Marquardt style.

use nalgebra::{DMatrix, DVector};

use crate::continuum::Continuum;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Relative Newton decrement below which a stage is converged; the
/// smoothed objective cannot be resolved further in double precision.
const STOP_DECREMENT: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Fixed(Point3),
    /// Free point with its initial position.
    Free(Point3),
    /// Point on `continua[continuum]` at the given initial parameter.
    Attached { continuum: usize, param: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSettings {
    pub mu_schedule: Vec<f64>,
    /// Total Newton iterations over all stages before giving up.
    pub max_iterations: usize,
    pub max_stage_iterations: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            mu_schedule: vec![1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12],
            max_iterations: 100_000,
            max_stage_iterations: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub positions: Vec<Point3>,
    pub params: Vec<Option<f64>>,
    /// Unsmoothed total edge length.
    pub length: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy)]
enum Var {
    None,
    Point(usize),
    Param(usize),
}

pub struct Problem<'a> {
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
    pub continua: &'a [Continuum],
}

struct State {
    x: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(nodes: Vec<Node>, edges: Vec<(usize, usize)>, continua: &'a [Continuum]) -> Self {
        Problem { nodes, edges, continua }
    }

    fn layout(&self) -> (Vec<Var>, usize) {
        let mut off = 0;
        let vars = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Fixed(_) => Var::None,
                Node::Free(_) => {
                    off += 3;
                    Var::Point(off - 3)
                }
                Node::Attached { .. } => {
                    off += 1;
                    Var::Param(off - 1)
                }
            })
            .collect();
        (vars, off)
    }

    fn initial(&self, vars: &[Var], nv: usize) -> State {
        let mut x = vec![0.0; nv];
        for (n, v) in self.nodes.iter().zip(vars) {
            match (n, v) {
                (Node::Free(p), Var::Point(o)) => {
                    x[*o] = p.x;
                    x[*o + 1] = p.y;
                    x[*o + 2] = p.z;
                }
                (Node::Attached { continuum, param }, Var::Param(o)) => {
                    x[*o] = self.continua[*continuum].normalize_param(*param)
                }
                _ => {}
            }
        }
        State { x }
    }

    fn positions(&self, vars: &[Var], x: &[f64]) -> Vec<Point3> {
        self.nodes
            .iter()
            .zip(vars)
            .map(|(n, v)| match (n, v) {
                (Node::Fixed(p), _) => *p,
                (_, Var::Point(o)) => Point3::new(x[*o], x[*o + 1], x[*o + 2]),
                (Node::Attached { continuum, .. }, Var::Param(o)) => self.continua[*continuum].point(x[*o]),
                _ => unreachable!(),
            })
            .collect()
    }

    fn smoothed(&self, pos: &[Point3], mu: f64) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| ((pos[a] - pos[b]).norm_sq() + mu * mu).sqrt())
            .sum()
    }

    pub fn true_length(pos: &[Point3], edges: &[(usize, usize)]) -> f64 {
        edges.iter().map(|&(a, b)| pos[a].dist(pos[b])).sum()
    }

    fn grad_hess(&self, vars: &[Var], x: &[f64], pos: &[Point3], mu: f64, nv: usize) -> (DVector<f64>, DMatrix<f64>) {
        let mut g = DVector::zeros(nv);
        let mut h = DMatrix::zeros(nv, nv);
        // Jacobian columns of each node's position w.r.t. its variables.
        let deriv: Vec<Option<(Point3, Point3)>> = self
            .nodes
            .iter()
            .zip(vars)
            .map(|(n, v)| match (n, v) {
                (Node::Attached { continuum, .. }, Var::Param(o)) => Some(self.continua[*continuum].derivatives(x[*o])),
                _ => None,
            })
            .collect();
        let jac = |node: usize| -> Vec<(usize, Point3)> {
            match vars[node] {
                Var::None => vec![],
                Var::Point(o) => vec![
                    (o, Point3::new(1.0, 0.0, 0.0)),
                    (o + 1, Point3::new(0.0, 1.0, 0.0)),
                    (o + 2, Point3::new(0.0, 0.0, 1.0)),
                ],
                Var::Param(o) => vec![(o, deriv[node].expect("attached").0)],
            }
        };
        for &(a, b) in &self.edges {
            let d = pos[a] - pos[b];
            let s = (d.norm_sq() + mu * mu).sqrt();
            let u = d / s;
            // Hblock * w = (w - d (d.w)/s^2) / s
            let hb = |w: Point3| (w - d * (d.dot(w) / (s * s))) / s;
            let ja = jac(a);
            let jb = jac(b);
            for &(i, c) in &ja {
                g[i] += u.dot(c);
            }
            for &(i, c) in &jb {
                g[i] -= u.dot(c);
            }
            for &(i, ci) in &ja {
                let hc = hb(ci);
                for &(j, cj) in &ja {
                    h[(i, j)] += hc.dot(cj);
                }
                for &(j, cj) in &jb {
                    h[(i, j)] -= hc.dot(cj);
                    h[(j, i)] -= hc.dot(cj);
                }
            }
            for &(i, ci) in &jb {
                let hc = hb(ci);
                for &(j, cj) in &jb {
                    h[(i, j)] += hc.dot(cj);
                }
            }
            if let (Var::Param(o), Some((_, dd))) = (vars[a], deriv[a]) {
                h[(o, o)] += u.dot(dd);
            }
            if let (Var::Param(o), Some((_, dd))) = (vars[b], deriv[b]) {
                h[(o, o)] -= u.dot(dd);
            }
        }
        (g, h)
    }

    /// Variables pinned at a bound whose gradient pushes outward.
    fn active_set(&self, vars: &[Var], x: &[f64], g: &DVector<f64>) -> Vec<bool> {
        let mut active = vec![false; x.len()];
        for (n, v) in self.nodes.iter().zip(vars) {
            if let (Node::Attached { continuum, .. }, Var::Param(o)) = (n, v) {
                if let Some((lo, hi)) = self.continua[*continuum].bounds() {
                    if (x[*o] <= lo && g[*o] > 0.0) || (x[*o] >= hi && g[*o] < 0.0) {
                        active[*o] = true;
                    }
                }
            }
        }
        active
    }

    fn project(&self, vars: &[Var], x: &mut [f64]) {
        for (n, v) in self.nodes.iter().zip(vars) {
            if let (Node::Attached { continuum, .. }, Var::Param(o)) = (n, v) {
                x[*o] = self.continua[*continuum].normalize_param(x[*o]);
            }
        }
    }

    pub fn solve(&self, settings: &NewtonSettings) -> Result<NewtonSolution> {
        let (vars, nv) = self.layout();
        let mut st = self.initial(&vars, nv);
        let mut iterations = 0;
        if nv > 0 {
            for &mu in &settings.mu_schedule {
                let mut stage_iters = 0;
                let mut lambda = 0.0f64;
                loop {
                    if iterations >= settings.max_iterations {
                        let pos = self.positions(&vars, &st.x);
                        let (g, _) = self.grad_hess(&vars, &st.x, &pos, mu, nv);
                        return Err(Error::NonConvergence { iterations, residual: g.amax() });
                    }
                    iterations += 1;
                    stage_iters += 1;
                    let pos = self.positions(&vars, &st.x);
                    let f0 = self.smoothed(&pos, mu);
                    let (mut g, mut h) = self.grad_hess(&vars, &st.x, &pos, mu, nv);
                    let active = self.active_set(&vars, &st.x, &g);
                    for i in 0..nv {
                        if active[i] {
                            g[i] = 0.0;
                            for j in 0..nv {
                                h[(i, j)] = 0.0;
                                h[(j, i)] = 0.0;
                            }
                            h[(i, i)] = 1.0;
                        }
                    }
                    if g.amax() < 1e-15 {
                        break;
                    }
                    let scale = (0..nv).map(|i| h[(i, i)].abs()).fold(1e-300, f64::max);
                    let mut accepted = false;
                    let mut decrement = 0.0;
                    for _ in 0..40 {
                        let mut hr = h.clone();
                        if lambda > 0.0 {
                            for i in 0..nv {
                                hr[(i, i)] += lambda * scale;
                            }
                        }
                        let Some(ch) = hr.cholesky() else {
                            lambda = if lambda == 0.0 { 1e-12 } else { lambda * 10.0 };
                            continue;
                        };
                        let p = ch.solve(&(-&g));
                        decrement = -g.dot(&p);
                        if !(decrement > 0.0) {
                            lambda = if lambda == 0.0 { 1e-12 } else { lambda * 10.0 };
                            continue;
                        }
                        // Backtracking line search with projection onto bounds.
                        let mut alpha = 1.0;
                        while alpha > 1e-12 {
                            let mut xn = st.x.clone();
                            for i in 0..nv {
                                xn[i] += alpha * p[i];
                            }
                            self.project(&vars, &mut xn);
                            let fn_ = self.smoothed(&self.positions(&vars, &xn), mu);
                            if fn_ < f0 && fn_ <= f0 - 1e-4 * alpha * decrement {
                                st.x = xn;
                                accepted = true;
                                break;
                            }
                            alpha *= 0.5;
                        }
                        if accepted {
                            lambda = if alpha == 1.0 { (lambda * 0.1).max(0.0) } else { lambda };
                            if lambda < 1e-14 {
                                lambda = 0.0;
                            }
                            break;
                        }
                        if decrement < STOP_DECREMENT * f0.max(1.0) {
                            break;
                        }
                        lambda = if lambda == 0.0 { 1e-12 } else { lambda * 10.0 };
                    }
                    if !accepted || decrement < STOP_DECREMENT * f0.max(1.0) || stage_iters >= settings.max_stage_iterations {
                        break;
                    }
                }
            }
        }
        let positions = self.positions(&vars, &st.x);
        let params = self
            .nodes
            .iter()
            .zip(&vars)
            .map(|(_, v)| match v {
                Var::Param(o) => Some(st.x[*o]),
                _ => None,
            })
            .collect();
        let length = Self::true_length(&positions, &self.edges);
        Ok(NewtonSolution { positions, params, length, iterations })
    }
}
