mod common;

use catlin_core::oracles::{
    ball_distance, ball_to_siegel, kobayashi_distance_siegel, siegel_to_ball, BallAutomorphism, BallPoint,
};
use catlin_core::{ModelDomain, Point};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

/// `arctanh √(1 − (1−|a|²)(1−|b|²)/|1−⟨a,b⟩|²)`, written out without any
/// of the library's cancellation-avoiding rearrangements.
fn naive_ball_distance(a: &BallPoint, b: &BallPoint) -> f64 {
    let inner = a.z1 * b.z1.conj() + a.z2 * b.z2.conj();
    let t = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr()) / (c(1.0, 0.0) - inner).norm_sqr();
    (1.0 - t).max(0.0).sqrt().atanh()
}

/// Poincaré distance of the left half-plane `{Re w < 0}` with curvature −4.
fn half_plane_distance(w1: Complex64, w2: Complex64) -> f64 {
    ((w1 - w2) / (w1 + w2.conj())).norm().atanh()
}

fn ball_point(max_norm_sqr: f64) -> impl Strategy<Value = BallPoint> {
    (complex(1.0), complex(1.0), 0.0..max_norm_sqr).prop_map(|(a, b, r2)| {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt().max(1e-9);
        let s = r2.sqrt() / n;
        BallPoint::new(a * s, b * s)
    })
}

fn siegel_point() -> impl Strategy<Value = Point> {
    interior_point(ModelDomain::thullen(1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn automorphisms_are_isometries(
        a in ball_point(0.8),
        x in ball_point(0.95),
        y in ball_point(0.95),
        th in 0.0..6.3f64,
        al in 0.0..6.3f64,
        be in 0.0..6.3f64,
    ) {
        let f = BallAutomorphism::from_angles(a, th, al, be).unwrap();
        let (fx, fy) = (f.apply(&x), f.apply(&y));
        prop_assert!(fx.is_inside() && fy.is_inside());
        let (d0, d1) = (ball_distance(&x, &y), ball_distance(&fx, &fy));
        prop_assert!((d0 - d1).abs() <= 1e-12 * (1.0 + d0) * 50.0, "{} vs {}", d0, d1);
    }

    #[test]
    fn automorphism_sends_centre_to_origin(a in ball_point(0.9), th in 0.0..6.3f64) {
        let f = BallAutomorphism::from_angles(a, th, 0.3, -0.7).unwrap();
        prop_assert!(f.apply(&a).norm_sqr() <= 1e-28);
        let origin = BallPoint::new(c(0.0, 0.0), c(0.0, 0.0));
        prop_assert!((ball_distance(&origin, &f.apply(&origin)) - ball_distance(&origin, &a)).abs() <= 1e-12);
    }

    #[test]
    fn ball_distance_matches_naive_formula(x in ball_point(0.9), y in ball_point(0.9)) {
        let (a, b) = (ball_distance(&x, &y), naive_ball_distance(&x, &y));
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + b), "{} vs {}", a, b);
    }

    #[test]
    fn slice_is_half_plane(w1 in (-20.0..-1e-3f64, -20.0..20.0f64), w2 in (-20.0..-1e-3f64, -20.0..20.0f64)) {
        let (w1, w2) = (c(w1.0, w1.1), c(w2.0, w2.1));
        let p = Point::new(c(0.0, 0.0), w1);
        let q = Point::new(c(0.0, 0.0), w2);
        let d = kobayashi_distance_siegel(&p, &q).unwrap();
        let want = half_plane_distance(w1, w2);
        prop_assert!((d - want).abs() <= 1e-9 * (1.0 + want), "{} vs {}", d, want);
    }

    #[test]
    fn cayley_map_round_trips(p in siegel_point()) {
        let b = siegel_to_ball(&p).unwrap();
        prop_assert!(b.is_inside());
        let back = ball_to_siegel(&b).unwrap();
        let scale = 1.0 + p.w.norm() + p.z.norm_sqr();
        prop_assert!((back.z - p.z).norm() <= 1e-12 * scale);
        prop_assert!((back.w - p.w).norm() <= 1e-12 * scale * scale);
        let defect = 4.0 * -ModelDomain::thullen(1).defining_value(&p) / (c(1.0, 0.0) - p.w).norm_sqr();
        prop_assert!((1.0 - b.norm_sqr() - defect).abs() <= 1e-12 * scale);
    }

    #[test]
    fn siegel_distance_is_a_metric(p in siegel_point(), q in siegel_point(), r in siegel_point()) {
        let pq = kobayashi_distance_siegel(&p, &q).unwrap();
        prop_assert_eq!(pq, kobayashi_distance_siegel(&q, &p).unwrap());
        prop_assert_eq!(kobayashi_distance_siegel(&p, &p).unwrap(), 0.0);
        let pr = kobayashi_distance_siegel(&p, &r).unwrap();
        let qr = kobayashi_distance_siegel(&q, &r).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
    }
}

#[test]
fn deep_vertical_distance_is_half_the_log_ratio() {
    let p = Point::from_reals(0.0, 0.0, -1.0, 0.0);
    for t in [1e-3, 1.0, 10.0, 30.0] {
        let q = Point::from_reals(0.0, 0.0, -(-t as f64).exp(), 0.0);
        let d = kobayashi_distance_siegel(&p, &q).unwrap();
        assert!((d - t / 2.0).abs() <= 1e-12 * (1.0 + t), "t = {t}: {d}");
    }
}

#[test]
fn boundary_points_are_rejected() {
    assert!(siegel_to_ball(&Point::from_reals(1.0, 0.0, -1.0, 0.0)).is_err());
    assert!(ball_to_siegel(&BallPoint::new(c(0.6, 0.0), c(0.8, 0.0))).is_err());
    let bad = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    assert!(BallAutomorphism::new(BallPoint::new(c(0.0, 0.0), c(0.0, 0.0)), bad).is_err());
}
