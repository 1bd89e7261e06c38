use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ksmt::construction::{build_x, ConstructionParams};
use ksmt::exec::Exec;
use ksmt::knot::certify;
use ksmt::opt::{solve_decomposed, solve_minimal_graph, solve_minimal_tree, ClusterSpec, OptOptions, TerminalSet};
use ksmt::topology::ForestCaps;
use ksmt::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn cloud(n: usize, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn exhaustive(c: &mut Criterion) {
    let mut g = c.benchmark_group("exhaustive tree");
    g.sample_size(10);
    for n in [6, 7] {
        let pts = cloud(n, n as u64);
        for (name, exec) in MODES {
            let opts = OptOptions { exec, ..OptOptions::default() };
            g.bench_with_input(BenchmarkId::new(name, n), &pts, |b, pts| b.iter(|| solve_minimal_tree(pts, &opts).unwrap()));
        }
    }
    g.finish();
}

fn forest(c: &mut Criterion) {
    let s3 = 3f64.sqrt() / 2.0;
    let pts = vec![
        ("a1".to_string(), Point3::new(-0.5, 0.0, s3)),
        ("c1".to_string(), Point3::new(-0.5, 0.0, -s3 * 0.9)),
        ("a2".to_string(), Point3::new(0.5, 0.0, -s3)),
        ("c2".to_string(), Point3::new(0.5, 0.0, s3 * 0.9)),
    ];
    let q = ksmt::continuum::Continuum::Circle(ksmt::geometry::Circle3::equator());
    let ts = TerminalSet::new(pts, vec![("Q".into(), q)]).unwrap();
    let mut g = c.benchmark_group("forest with circle");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = OptOptions { exec, ..OptOptions::default() };
        g.bench_function(name, |b| b.iter(|| solve_minimal_graph(&ts, ForestCaps::default(), &opts).unwrap()));
    }
    g.finish();
}

fn main_tree(c: &mut Criterion) {
    let (x, named) = build_x(&ConstructionParams::default()).unwrap();
    let spec = ClusterSpec::for_chain(named.n());
    let mut g = c.benchmark_group("decomposed X");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = OptOptions { exec, ..OptOptions::default() };
        g.bench_function(name, |b| b.iter(|| solve_decomposed(&x, &spec, 50, 0, &opts).unwrap()));
    }
    let tree = solve_decomposed(&x, &spec, 0, 0, &OptOptions::default()).unwrap().graph;
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("certify", name), |b| b.iter(|| certify(&tree, None, 0, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, exhaustive, forest, main_tree);
criterion_main!(benches);
