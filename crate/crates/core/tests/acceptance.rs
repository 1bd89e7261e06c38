//! Acceptance run: one PASS/FAIL line per criterion. Expected values come
//! from closed forms or from small oracles written here, not from the
//! library under test.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ksmt::construction::{build_x, ConstructionParams};
use ksmt::exec::Exec;
use ksmt::geometry::{RigidMotion, Segment};
use ksmt::knot::{certify, KnotDiagram, LaurentPolynomial, PolygonalCurve, Verdict};
use ksmt::lemmas::{verify, LemmaParams, LemmaReport};
use ksmt::opt::newton::{Node, Problem};
use ksmt::opt::{solve_decomposed, solve_minimal_graph, solve_minimal_tree, ClusterSpec, OptOptions, TerminalSet};
use ksmt::topology::{enumerate_full_topologies, ForestCaps};
use ksmt::continuum::Continuum;
use ksmt::geometry::Circle3;
use ksmt::{EmbeddedGraph, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S3: f64 = 1.732_050_807_568_877_2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

fn hexagon() -> [(&'static str, Point3); 6] {
    [
        ("a1", p(-0.5, 0.0, S3 / 2.0)),
        ("b1", p(-1.0, 0.0, 0.0)),
        ("c1", p(-0.5, 0.0, -S3 / 2.0)),
        ("a2", p(0.5, 0.0, -S3 / 2.0)),
        ("b2", p(1.0, 0.0, 0.0)),
        ("c2", p(0.5, 0.0, S3 / 2.0)),
    ]
}

fn hx(label: &str) -> Point3 {
    hexagon().iter().find(|(l, _)| *l == label).unwrap().1
}

/// Length of the minimal tree on three points: the two shorter legs at an
/// angle of at least 120 degrees, otherwise the Fermat-point formula.
fn fermat_oracle(a: Point3, b: Point3, c: Point3) -> f64 {
    let (ab, bc, ca) = (a.dist(b), b.dist(c), c.dist(a));
    let angle = |u: Point3, v: Point3, w: Point3| ((v - u).dot(w - u) / (v.dist(u) * w.dist(u))).clamp(-1.0, 1.0).acos();
    if angle(a, b, c) >= 2.0 * PI / 3.0 {
        return ab + ca;
    }
    if angle(b, c, a) >= 2.0 * PI / 3.0 {
        return ab + bc;
    }
    if angle(c, a, b) >= 2.0 * PI / 3.0 {
        return bc + ca;
    }
    let area = (b - a).cross(c - a).norm() / 2.0;
    ((ab * ab + bc * bc + ca * ca) / 2.0 + 2.0 * S3 * area).sqrt()
}

/// Prim's algorithm on the complete graph.
fn mst_oracle(pts: &[Point3]) -> f64 {
    let n = pts.len();
    let mut best = vec![f64::INFINITY; n];
    let mut used = vec![false; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n).filter(|&i| !used[i]).min_by(|&i, &j| best[i].total_cmp(&best[j])).unwrap();
        used[u] = true;
        total += best[u];
        for v in 0..n {
            if !used[v] {
                best[v] = best[v].min(pts[u].dist(pts[v]));
            }
        }
    }
    total
}

fn seg_dist(q: Point3, a: Point3, b: Point3) -> f64 {
    let d = b - a;
    let t = ((q - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    q.dist(a + d * t)
}

/// Hausdorff distance between a graph and the union of the given hexagon edges.
fn hausdorff_to_edges(g: &EmbeddedGraph, edges: &[(Point3, Point3)]) -> f64 {
    let step = 0.01;
    let on_graph = g.sample(step);
    let into = on_graph.iter().map(|&q| edges.iter().map(|&(a, b)| seg_dist(q, a, b)).fold(f64::INFINITY, f64::min));
    let segs: Vec<Segment> = g.segments();
    let back = edges.iter().flat_map(|&(a, b)| {
        let k = (a.dist(b) / step).ceil() as usize;
        (0..=k).map(move |i| a.lerp(b, i as f64 / k as f64))
    });
    let back: Vec<f64> = back.map(|q| segs.iter().map(|s| seg_dist(q, s.a, s.b)).fold(f64::INFINITY, f64::min)).collect();
    into.chain(back).fold(0.0, f64::max)
}

fn hex_edges(labels: &[&str]) -> Vec<(Point3, Point3)> {
    labels.windows(2).map(|w| (hx(w[0]), hx(w[1]))).collect()
}

fn double_factorial(k: i64) -> usize {
    (1..=k).rev().step_by(2).product::<i64>().max(1) as usize
}

fn delta_sane(d: &LaurentPolynomial) -> bool {
    let at_one: i64 = d.coeffs.iter().sum();
    let rev: Vec<i64> = d.coeffs.iter().rev().copied().collect();
    at_one.abs() == 1 && rev == d.coeffs
}

fn lemma(id: &str) -> LemmaReport {
    verify(id, &LemmaParams::default()).unwrap_or_else(|e| panic!("lemma {id}: {e}"))
}

fn quantity(r: &LemmaReport, name: &str) -> f64 {
    *r.quantities.get(name).unwrap_or_else(|| panic!("{} has no quantity `{name}`", r.id))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let opts = OptOptions::default();
    let side = (7f64.sqrt() + S3) / 2.0;
    let t = solve_minimal_tree(&[hx("a1"), hx("c2"), p(0.0, 1.0, 0.0)], &opts).unwrap().length();
    let five = lemma("five");
    let leaf = quantity(&five, "b1-leaf candidate");
    let bound = quantity(&five, "interior bound");
    let errs = [(t - side).abs(), (leaf - (1.0 + 2.0 * S3)).abs(), (bound - 2.5 * S3).abs()];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    outcome(
        worst < 1e-8 && start.elapsed() < Duration::from_secs(1),
        format!("|T(a1,c2,b4)| = {t:.10}, 1+2sqrt3 candidate {leaf:.10}, interior bound {bound:.10}; max error {worst:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let opts = OptOptions::default();
    let order = ["a1", "b1", "c1", "a2", "b2", "c2"];
    let mut worst_len: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for (size, target) in [(4usize, 3.0), (5, 4.0)] {
        for start in 0..6 {
            let labels: Vec<&str> = (0..size).map(|k| order[(start + k) % 6]).collect();
            let pts: Vec<Point3> = labels.iter().map(|l| hx(l)).collect();
            let sol = solve_minimal_tree(&pts, &opts).unwrap();
            worst_len = worst_len.max((sol.length() - target).abs());
            worst_h = worst_h.max(hausdorff_to_edges(&sol.graph, &hex_edges(&labels)));
        }
    }

    // Four points and the circle through the hexagon: five terminals with
    // every attachment configuration enumerated.
    let start = Instant::now();
    let pts: Vec<(String, Point3)> = ["a1", "c1", "a2", "c2"].iter().map(|l| (l.to_string(), hx(l))).collect();
    let q = Continuum::Circle(Circle3::equator());
    let ts = TerminalSet::new(pts, vec![("Q".into(), q)]).unwrap();
    let sol = solve_minimal_graph(&ts, ForestCaps::default(), &opts).unwrap();
    let elapsed = start.elapsed();
    worst_len = worst_len.max((sol.length() - 4.0).abs());
    let tie_h = sol
        .ties
        .iter()
        .map(|g| {
            let own: Vec<(Point3, Point3)> = g.segments().iter().map(|s| (s.a, s.b)).collect();
            own.iter().map(|&(a, b)| all_hex_edge_distance(a, b)).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    worst_h = worst_h.max(tie_h);
    outcome(
        worst_len < 1e-9 && worst_h < 1e-6 && elapsed < Duration::from_secs(60),
        format!(
            "length error {worst_len:.1e}, Hausdorff to hexagon edges {worst_h:.1e}, {} configurations with Q in {:.2?}",
            sol.configs_tried, elapsed
        ),
    )
}

/// Largest distance from a sampled segment to the hexagon boundary.
fn all_hex_edge_distance(a: Point3, b: Point3) -> f64 {
    let ring: Vec<(Point3, Point3)> = (0..6).map(|i| (hexagon()[i].1, hexagon()[(i + 1) % 6].1)).collect();
    (0..=50)
        .map(|i| a.lerp(b, i as f64 / 50.0))
        .map(|q| ring.iter().map(|&(u, v)| seg_dist(q, u, v)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn criterion_3() -> Outcome {
    let gamma = 0.1;
    let opts = OptOptions::default();
    let squash = |q: Point3| p(q.x, 0.0, q.z * (1.0 - gamma));
    let (c1, c2) = (squash(hx("c1")), squash(hx("c2")));
    let oracle = fermat_oracle(hx("a1"), hx("b1"), c1) + fermat_oracle(hx("a2"), hx("b2"), c2);
    let pts = vec![("a1".into(), hx("a1")), ("c1".into(), c1), ("a2".into(), hx("a2")), ("c2".into(), c2)];
    let q = Continuum::Circle(Circle3::equator());
    let ts = TerminalSet::new(pts, vec![("Q".into(), q)]).unwrap();
    let sol = solve_minimal_graph(&ts, ForestCaps::default(), &opts).unwrap();
    let gap = sol.uniqueness_gap().unwrap_or(f64::INFINITY);
    let err = (sol.length() - oracle).abs();
    outcome(
        err < 1e-8 && sol.length() < 4.0 - gamma && gap > 1e-4,
        format!("|G(A)| = {:.10}, oracle {oracle:.10} (error {err:.1e}), bound {:.1}, gap {gap:.3e}", sol.length(), 4.0 - gamma),
    )
}

fn criterion_4() -> Outcome {
    let opts = OptOptions::default();
    let gamma = 0.1;
    let c2 = p(0.5, 0.0, S3 / 2.0 * (1.0 - gamma));
    let mut lens = Vec::new();
    let mut oracle_err: f64 = 0.0;
    for k in 0..50 {
        let th = -0.2 * k as f64 / 49.0;
        let v = p(th.cos(), 0.0, th.sin());
        let len = solve_minimal_tree(&[hx("a2"), v, c2], &opts).unwrap().length();
        oracle_err = oracle_err.max((len - fermat_oracle(hx("a2"), v, c2)).abs());
        lens.push(len);
    }
    let diffs: Vec<f64> = lens.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = diffs.iter().all(|&d| d < -1e-12);
    let report = lemma("circles");
    outcome(
        monotone && oracle_err < 1e-9 && report.passed(),
        format!(
            "49 differences in [{:.3e}, {:.3e}], oracle error {oracle_err:.1e}, lemma circles {:?}",
            diffs.iter().copied().fold(f64::INFINITY, f64::min),
            diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            report.verdict
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let params = ConstructionParams::new(0.1, 0.05, 0.05).unwrap();
    let (x, named) = build_x(&params).unwrap();
    let sol = solve_decomposed(&x, &ClusterSpec::for_chain(named.n()), 200, 0, &OptOptions::default()).unwrap();
    let r = &sol.report;
    let elapsed = start.elapsed();
    outcome(
        sol.graph.steiner_count() == 6
            && r.max_direction_sum < 1e-6
            && r.trials >= 200
            && r.best_improvement() <= 1e-9
            && elapsed < Duration::from_secs(300),
        format!(
            "|X| = {}, {} branch points, direction sums {:.1e}, best improvement {:.1e} over {} trials, {:.2?}",
            x.points.len(),
            sol.graph.steiner_count(),
            r.max_direction_sum,
            r.best_improvement(),
            r.trials,
            elapsed
        ),
    )
}

fn criterion_6(diagrams: &mut Vec<LaurentPolynomial>) -> Outcome {
    let start = Instant::now();
    let (x, named) = build_x(&ConstructionParams::default()).unwrap();
    let sol = solve_decomposed(&x, &ClusterSpec::for_chain(named.n()), 0, 0, &OptOptions::default()).unwrap();
    let mut labels: Vec<String> = x.points.iter().map(|(l, _)| l.clone()).collect();
    labels.extend((labels.len()..sol.graph.vertices.len()).map(|i| format!("s{i}")));
    let mut ok = true;
    let mut pairs = Vec::new();
    for seed in 0..10 {
        let (cert, witness) = certify(&sol.graph, Some(&labels), seed, Exec::Parallel).unwrap();
        ok &= cert.verdict == Verdict::Knotted && cert.alexander_coeffs == [1, -1, 1] && cert.determinant == 3;
        pairs.push(cert.leaf_pair.clone());
        if let Some(w) = witness {
            diagrams.push(w.alexander);
        }
    }
    ok &= pairs.windows(2).all(|w| w[0] == w[1]);
    let elapsed = start.elapsed();
    outcome(
        ok && elapsed < Duration::from_secs(120),
        format!("10 seeds, leaf pair {:?}, Alexander t^2 - t + 1, determinant 3: {ok}, {elapsed:.2?}", pairs[0]),
    )
}

fn criterion_7(diagrams: &mut Vec<LaurentPolynomial>) -> Outcome {
    let opts = OptOptions::default();
    let four = solve_minimal_tree(&["a1", "b1", "c1", "a2"].map(hx), &opts).unwrap();
    let r = 0.5f64.sqrt();
    let square = [p(r, r, 0.0), p(-r, r, 0.0), p(-r, -r, 0.0), p(r, -r, 0.0)];
    let sq = solve_minimal_tree(&square, &opts).unwrap();
    let v1 = certify(&four.graph, None, 0, Exec::Parallel).unwrap().0.verdict;
    let v2 = certify(&sq.graph, None, 0, Exec::Parallel).unwrap().0.verdict;
    let tref = KnotDiagram::from_pd(&[[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]]).unwrap().alexander_polynomial().unwrap();
    let fig8 = KnotDiagram::from_pd(&[[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]])
        .unwrap()
        .alexander_polynomial()
        .unwrap();
    diagrams.push(tref.clone());
    diagrams.push(fig8.clone());
    outcome(
        v1 == Verdict::PlanarUnknotted && v2 == Verdict::PlanarUnknotted && tref.coeffs == [1, -1, 1] && fig8.coeffs == [1, -3, 1],
        format!("lemma four tree {v1}, square {v2}, trefoil {:?}, figure-eight {:?}", tref.coeffs, fig8.coeffs),
    )
}

fn criterion_8(diagrams: &mut Vec<LaurentPolynomial>) -> Outcome {
    let opts = OptOptions { exec: Exec::Sequential, ..OptOptions::default() };
    let mut notes = Vec::new();

    let counts_ok = (3..=9).all(|n| enumerate_full_topologies(n).unwrap().len() == double_factorial(2 * n as i64 - 5));
    notes.push(format!("topology counts {counts_ok}"));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let instances: Vec<Vec<Point3>> = (0..1000)
        .map(|_| {
            let n = rng.gen_range(3..=7);
            (0..n).map(|_| p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
        })
        .collect();
    let sandwich_bad = Exec::Parallel
        .map(&instances, |pts| {
            let smt = solve_minimal_tree(pts, &opts).unwrap().length();
            let mst = mst_oracle(pts);
            !(smt >= mst / 2.0 && smt <= mst + 1e-9)
        })
        .into_iter()
        .filter(|&b| b)
        .count();
    notes.push(format!("MST sandwich violations {sandwich_bad}/1000"));

    let mut rigid_err: f64 = 0.0;
    for pts in instances.iter().take(30) {
        let m = RigidMotion {
            axis: p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0)).normalized().unwrap(),
            angle: rng.gen_range(0.0..2.0 * PI),
            translation: p(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
        };
        let moved: Vec<Point3> = pts.iter().map(|&q| m.apply(q)).collect();
        let a = solve_minimal_tree(pts, &opts).unwrap().length();
        let b = solve_minimal_tree(&moved, &opts).unwrap().length();
        rigid_err = rigid_err.max((a - b).abs());
    }
    notes.push(format!("rigid motion error {rigid_err:.1e}"));

    let mut spread: f64 = 0.0;
    for pts in instances.iter().filter(|p| p.len() == 6).take(5) {
        let topo = &enumerate_full_topologies(6).unwrap()[rng.gen_range(0..105)];
        let lens: Vec<f64> = (0..20)
            .map(|_| {
                let mut nodes: Vec<Node> = pts.iter().map(|&q| Node::Fixed(q)).collect();
                nodes.extend((0..topo.k).map(|_| {
                    Node::Free(p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                }));
                Problem::new(nodes, topo.edges.clone(), &[]).solve(&Default::default()).unwrap().length
            })
            .collect();
        let (lo, hi) = lens.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        spread = spread.max(hi - lo);
    }
    notes.push(format!("20-restart spread {spread:.1e}"));

    for (n, f) in [(3.0, 2.0), (2.0, 3.0)] {
        // (2,3) and (3,2) torus knots drawn as space curves.
        let curve = PolygonalCurve::from_fn(240, |s| {
            let t = s;
            let r = 2.0 + (n * t).cos();
            p(r * (f * t).cos(), r * (f * t).sin(), (n * t).sin())
        })
        .unwrap();
        for seed in 0..3 {
            diagrams.push(KnotDiagram::project(&curve, seed).unwrap().alexander_polynomial().unwrap());
        }
    }
    let fig8 = PolygonalCurve::from_fn(240, |s| {
        let t = s;
        p((2.0 + (2.0 * t).cos()) * (3.0 * t).cos(), (2.0 + (2.0 * t).cos()) * (3.0 * t).sin(), (4.0 * t).sin())
    })
    .unwrap();
    diagrams.push(KnotDiagram::project(&fig8, 0).unwrap().alexander_polynomial().unwrap());
    let insane = diagrams.iter().filter(|d| !delta_sane(d)).count();
    notes.push(format!("{} diagrams, {insane} with bad Delta(1) or asymmetry", diagrams.len()));

    outcome(counts_ok && sandwich_bad == 0 && rigid_err < 1e-9 && spread < 1e-8 && insane == 0, notes.join(", "))
}

fn main() {
    let mut diagrams = Vec::new();
    let runs: Vec<(&str, Box<dyn FnOnce(&mut Vec<LaurentPolynomial>) -> Outcome>)> = vec![
        ("closed-form constants", Box::new(|_| criterion_1())),
        ("four/five/hexa optima", Box::new(|_| criterion_2())),
        ("split lemma at gamma=0.1", Box::new(|_| criterion_3())),
        ("circle sweep monotone", Box::new(|_| criterion_4())),
        ("main tree structure", Box::new(|_| criterion_5())),
        ("knot certificate", Box::new(criterion_6)),
        ("unknotted baselines", Box::new(criterion_7)),
        ("property suites", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in runs.into_iter().enumerate() {
        let start = Instant::now();
        let o = run(&mut diagrams);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} criterion {} {name} ({:.2?}): {}", i + 1, start.elapsed(), o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
