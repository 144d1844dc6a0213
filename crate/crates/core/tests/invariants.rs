use std::f64::consts::PI;

use hyperc_core::analytic::{self, alpha_occupied};
use hyperc_core::hypgeo::{reflect, wrap_angle};
use hyperc_core::quad::Quadrature;
use hyperc_core::sampler::{phi_segment, phi_separating};
use hyperc_core::treecover::Word;
use hyperc_core::{
    dist, Executor, Geodesic, GeodesicFrame, HPoint, Isometry, ModelParams, RngStream,
};
use proptest::prelude::*;
use rand::Rng;

fn point() -> impl Strategy<Value = HPoint> {
    (0.0..6.0f64, 0.0..2.0 * PI).prop_map(|(d, a)| HPoint::from_polar(d, a))
}

fn line() -> impl Strategy<Value = Geodesic> {
    (0.0..2.0 * PI, 0.05..PI).prop_map(|(a, gap)| Geodesic::from_disk_angles(a, a + gap).unwrap())
}

fn isometry() -> impl Strategy<Value = Isometry> {
    (0.0..2.0 * PI, -3.0..3.0f64, -2.0..2.0f64).prop_map(|(a, log_s, shift)| {
        Isometry::rotation(a).compose(&Isometry::affine(log_s.exp(), shift))
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_a_metric(p in point(), q in point(), r in point()) {
        prop_assert!(close(dist(p, q), dist(q, p), 1e-12));
        prop_assert!(dist(p, p) < 1e-7);
        prop_assert!(dist(p, r) <= dist(p, q) + dist(q, r) + 1e-9);
    }

    #[test]
    fn isometries_preserve_distance(p in point(), q in point(), m in isometry()) {
        prop_assert!(close(dist(m.apply(p), m.apply(q)), dist(p, q), 1e-8));
        let back = m.inverse().apply(m.apply(p));
        prop_assert!(dist(back, p) < 1e-6);
    }

    #[test]
    fn disk_round_trip(p in point()) {
        let (u, v) = p.to_disk();
        prop_assert!(u * u + v * v < 1.0);
        let q = HPoint::from_disk(u, v).unwrap();
        prop_assert!(dist(p, q) < 1e-7);
    }

    #[test]
    fn polar_round_trip(d in 0.01..6.0f64, a in 0.0..2.0 * PI) {
        let (d2, a2) = HPoint::from_polar(d, a).polar();
        prop_assert!(close(d, d2, 1e-9));
        let da = wrap_angle(a - a2);
        prop_assert!(da.min(2.0 * PI - da) < 1e-8);
    }

    #[test]
    fn reflection_is_an_involution_fixing_its_line(g in line(), p in point(), t in -4.0..4.0f64) {
        let q = reflect(&g, p);
        prop_assert!(dist(reflect(&g, q), p) < 1e-6);
        prop_assert!(close(g.distance(q), g.distance(p), 1e-7));
        if g.distance(p) > 1e-6 {
            prop_assert!(g.separates(p, q));
        }
        let on = g.canonical_frame().point(t);
        prop_assert!(dist(reflect(&g, on), on) < 1e-6);
    }

    #[test]
    fn fermi_coordinates_round_trip(g in line(), s in -4.0..4.0f64, y in -3.0..3.0f64) {
        let frame = g.canonical_frame();
        let p = frame.offset_point(s, y);
        let (s2, y2) = frame.locate(p);
        prop_assert!(close(s, s2, 1e-7) && close(y, y2, 1e-7));
        prop_assert!(close(g.distance(p), y.abs(), 1e-7));
    }

    #[test]
    fn frame_points_are_arclength(p in point(), a in 0.0..2.0 * PI, t in 0.0..5.0f64) {
        let f = GeodesicFrame::at(p, a);
        prop_assert!(close(dist(f.point(0.0), f.point(t)), t, 1e-7));
    }

    #[test]
    fn vacant_f_is_supermultiplicative(r1 in 0.0..20.0f64, r2 in 0.0..20.0f64,
                                       lambda in 0.0..2.0f64, radius in 0.05..3.0f64) {
        let p = ModelParams::new(lambda, radius).unwrap();
        let f = |r| analytic::f_vacant(r, p).unwrap();
        prop_assert!(f(r1 + r2) >= f(r1) * f(r2) * (1.0 - 1e-12));
        prop_assert!(f(r1 + r2) <= f(r1.max(r2)) * (1.0 + 1e-12));
    }

    #[test]
    fn lrp_probabilities_decrease(x in -50i64..50, n in 2i64..300, lambda in 0.1..3.0f64, c in 0.1..1.0f64) {
        let p1 = analytic::lrp_edge_prob(x, x + n, lambda, c).unwrap();
        let p2 = analytic::lrp_edge_prob(x, x + n + 1, lambda, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 <= p1);
        let back = analytic::lrp_edge_prob(x + n, x, lambda, c).unwrap();
        prop_assert!(close(back, p1, 1e-12));
    }

    #[test]
    fn line_measures(r in 0.01..10.0f64, t in 0.01..3.1f64) {
        prop_assert!(close(phi_segment(r).unwrap(), r, 1e-12));
        let a = phi_separating(t).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(close(a, phi_separating(PI - t).unwrap(), 1e-9));
    }

    #[test]
    fn words_walk_up_and_down(letters in proptest::collection::vec(0u8..3, 0..12), j in 0u8..3) {
        let mut w = Word::empty();
        for &l in &letters {
            if w.last() != Some(l) {
                w = w.child(l);
            }
        }
        prop_assert!(w.is_reduced());
        if w.last() != Some(j) {
            let c = w.child(j);
            prop_assert_eq!(c.parent(), Some(w.clone()));
            prop_assert_eq!(c.prefix(w.len()), w);
        }
    }

    #[test]
    fn streams_do_not_depend_on_workers(seed in any::<u64>(), n in 1u64..64) {
        let draw = |i: u64| RngStream::new(seed, i).rng().random::<u64>();
        let seq = Executor::Sequential.map(n, draw);
        let par = Executor::with_workers(3).map(n, draw);
        prop_assert_eq!(seq, par);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn occupied_exponent_falls_with_intensity(lambda in 0.05..0.5f64, radius in 0.3..1.5f64) {
        let q = Quadrature::default();
        let a = alpha_occupied(ModelParams::new(lambda, radius).unwrap(), &q).unwrap();
        let b = alpha_occupied(ModelParams::new(lambda * 1.2, radius).unwrap(), &q).unwrap();
        prop_assert!(a.residual.abs() < 1e-10 && b.residual.abs() < 1e-10);
        prop_assert!(b.alpha < a.alpha);
    }

    #[test]
    fn hitting_identity(t in 0.0..2.0f64, lambda in 0.05..2.0f64) {
        let q = Quadrature::default();
        let p = ModelParams::new(lambda, 1.0).unwrap();
        let g = analytic::hitting_cdf(t, p, &q).unwrap();
        let h = analytic::hitting_h(t, p, &q).unwrap();
        prop_assert!((h + 1.0 - g).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&g));
    }
}
