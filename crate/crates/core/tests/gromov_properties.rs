mod common;

use catlin_core::gromov::{
    boundary_product_experiment, estimate_delta, gromov_product, stability_checkpoints, BandSampler, Ray,
};
use catlin_core::oracles::ExactSiegel;
use catlin_core::geodesic::CatlinDistance;
use catlin_core::{DistanceBracket, DistanceProvider, ModelDomain, Point, SolverOptions};
use common::*;
use proptest::prelude::*;

/// Exact Siegel distances widened to a bracket `[d/(1+e), d(1+e)]`.
struct Widened(f64);

impl DistanceProvider for Widened {
    fn bracket(&self, p: &Point, q: &Point) -> catlin_core::Result<DistanceBracket> {
        let d = ExactSiegel.bracket(p, q)?.upper;
        Ok(DistanceBracket { lower: d / (1.0 + self.0), upper: d * (1.0 + self.0), iterations: 0, converged: true })
    }
}

fn siegel_point() -> impl Strategy<Value = Point> {
    interior_point(ModelDomain::thullen(1))
}

fn exact(p: &Point, q: &Point) -> f64 {
    ExactSiegel.bracket(p, q).unwrap().upper
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_products_are_points(o in siegel_point(), x in siegel_point(), y in siegel_point()) {
        let g = gromov_product(&o, &x, &y, &ExactSiegel).unwrap();
        prop_assert_eq!(g.lower, g.upper);
        prop_assert!(g.lower >= 0.0);
        prop_assert!(g.upper <= exact(&x, &o).min(exact(&y, &o)) + 1e-9);
    }

    #[test]
    fn product_interval_encloses_truth(
        o in siegel_point(), x in siegel_point(), y in siegel_point(), e in 0.0..0.5f64,
    ) {
        let truth = gromov_product(&o, &x, &y, &ExactSiegel).unwrap().lower;
        let g = gromov_product(&o, &x, &y, &Widened(e)).unwrap();
        prop_assert!(g.lower >= 0.0 && g.lower <= g.upper);
        prop_assert!(g.contains(truth, 1e-9), "{} not in [{}, {}]", truth, g.lower, g.upper);
    }

    #[test]
    fn basepoint_change_is_bounded(
        o in siegel_point(), o2 in siegel_point(), x in siegel_point(), y in siegel_point(),
    ) {
        let a = gromov_product(&o, &x, &y, &ExactSiegel).unwrap().lower;
        let b = gromov_product(&o2, &x, &y, &ExactSiegel).unwrap().lower;
        prop_assert!((a - b).abs() <= exact(&o, &o2) + 1e-9);
    }
}

#[test]
fn collinear_points_have_no_defect() {
    // points on one geodesic of the Siegel domain, basepoint on it too
    let pts: Vec<Point> = (-4..=4).map(|t| Point::from_reals(0.0, 0.0, -(f64::from(t) * 0.7).exp(), 0.0)).collect();
    let o = pts[4];
    for x in &pts {
        for y in &pts {
            for z in &pts {
                let d = catlin_core::gromov::four_point_defect(x, y, z, &o, &ExactSiegel).unwrap();
                assert!(d <= 1e-12, "defect {d}");
            }
        }
    }
}

#[test]
fn siegel_delta_is_bounded_and_monotone() {
    let d = ModelDomain::thullen(1);
    let o = Point::from_reals(0.0, 0.0, -1.0, 0.0);
    let r = estimate_delta(&d, &o, &BandSampler::default(), 2000, 60, 3, &ExactSiegel, |_, _| {}).unwrap();
    assert_eq!(r.samples, 2000);
    let s: Vec<f64> = r.stability.iter().map(|s| s.delta_hat).collect();
    assert_eq!(r.stability.iter().map(|s| s.samples).collect::<Vec<_>>(), stability_checkpoints(2000));
    assert!(s.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*s.last().unwrap(), r.delta_hat);
    // ideal triangles give ln 2 in the real hyperbolic plane of curvature −4 scaled by ½
    assert!(r.delta_hat > 0.0 && r.delta_hat <= std::f64::consts::LN_2, "{}", r.delta_hat);
    let again = estimate_delta(&d, &o, &BandSampler::default(), 2000, 60, 3, &ExactSiegel, |_, _| {}).unwrap();
    assert_eq!(r, again);
}

#[test]
fn delta_rejects_empty_runs() {
    let d = ModelDomain::thullen(1);
    let o = Point::from_reals(0.0, 0.0, -1.0, 0.0);
    let s = BandSampler::default();
    assert!(estimate_delta(&d, &o, &s, 0, 10, 0, &ExactSiegel, |_, _| {}).is_err());
    assert!(estimate_delta(&d, &o, &s, 10, 0, 0, &ExactSiegel, |_, _| {}).is_err());
    let bad = BandSampler { radius: -1.0, ..BandSampler::default() };
    assert!(estimate_delta(&d, &o, &bad, 10, 10, 0, &ExactSiegel, |_, _| {}).is_err());
}

#[test]
fn catlin_product_on_a_vertical_line_is_tight() {
    let d = ModelDomain::thullen(1);
    let provider = CatlinDistance::new(d.clone(), SolverOptions::default());
    let o = Point::from_reals(0.0, 0.0, -1.0, 0.0);
    let x = Point::from_reals(0.0, 0.0, -(-1f64).exp(), 0.0);
    let y = Point::from_reals(0.0, 0.0, -1f64.exp(), 0.0);
    let g = gromov_product(&o, &x, &y, &provider).unwrap();
    assert!(g.width() <= 0.15, "{g:?}");
}

#[test]
fn product_on_one_ray_grows_with_depth() {
    let d = ModelDomain::thullen(1);
    let foot = d.boundary_point(c(0.0, 0.0), 0.0);
    let ray = Ray::new(foot, 1.0);
    let rows = boundary_product_experiment(&d, &ray, &ray, &[0.5, 1.0, 2.0], None, &ExactSiegel).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].lower > w[0].lower);
    }
}
