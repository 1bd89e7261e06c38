use approx::assert_abs_diff_eq;
use ksmt::construction::{arc_m, arc_m_length_closed_form, build_x, d_points, named_points, ConstructionParams};
use ksmt::continuum::Continuum;

#[test]
fn golden_sizes_at_defaults() {
    let params = ConstructionParams::default();
    let (x, named) = build_x(&params).unwrap();
    assert_eq!(named.n(), 211);
    assert_eq!(x.points.len(), 217);
    let labels: Vec<&str> = x.points.iter().take(6).map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, ["a1", "e1", "f1", "a2", "e2", "f2"]);
    assert_eq!(x.points[6].0, "t1");
    assert_eq!(x.points[216].0, "t211");
}

#[test]
fn every_terminal_is_on_the_sphere() {
    let (x, _) = build_x(&ConstructionParams::new(0.05, 0.1, 0.03).unwrap()).unwrap();
    for (l, p) in &x.points {
        assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
        assert!(p.is_finite(), "{l}");
    }
}

#[test]
fn m_length_matches_a_fine_polyline() {
    for delta in [0.01, 0.05, 0.2] {
        let m = Continuum::Arcs(arc_m(delta).unwrap());
        let pts = m.sample(200_000);
        let chord: f64 = pts.windows(2).map(|w| w[0].dist(w[1])).sum();
        assert_abs_diff_eq!(chord, arc_m_length_closed_form(delta), epsilon = 1e-6);
    }
    assert_abs_diff_eq!(arc_m_length_closed_form(0.05), 9.42281, epsilon = 1e-5);
}

#[test]
fn chain_hugs_m_between_d1_and_d2() {
    let params = ConstructionParams::default();
    let named = named_points(&params).unwrap();
    let m = Continuum::Arcs(arc_m(params.delta).unwrap());
    let (d1, d2) = d_points(params.delta);
    let chain: Vec<_> = named.chain.iter().map(|l| named.at(l)).collect();
    for w in chain[1..chain.len() - 1].windows(2) {
        assert!(w[0].dist(w[1]) < params.eps);
    }
    for p in &chain[1..chain.len() - 1] {
        assert!(m.distance_to(*p).unwrap() < 1e-9);
    }
    assert!(chain[0].dist(d1) < params.eps);
    assert!(chain[chain.len() - 1].dist(d2) < params.eps);
    // The outer pair straddles the end of M further apart than any inner gap.
    let inner = chain[1..chain.len() - 1].windows(2).map(|w| w[0].dist(w[1])).fold(0.0, f64::max);
    assert!(chain[0].dist(chain[1]) > inner);
}

#[test]
fn smaller_eps_gives_a_denser_chain() {
    let a = named_points(&ConstructionParams::new(0.1, 0.05, 0.05).unwrap()).unwrap().n();
    let b = named_points(&ConstructionParams::new(0.1, 0.05, 0.025).unwrap()).unwrap().n();
    assert!(b > 2 * a - 10, "{a} {b}");
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(ConstructionParams::new(0.0, 0.05, 0.05).is_err());
    assert!(ConstructionParams::new(0.1, -1.0, 0.05).is_err());
    assert!(ConstructionParams::new(0.1, 0.05, f64::NAN).is_err());
}
