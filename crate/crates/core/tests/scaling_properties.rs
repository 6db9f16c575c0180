mod common;

use catlin_core::scaling::{
    build_step, normalizing_tau, rescaled_defining, scale_at_infinity, ScalingStep,
};
use catlin_core::{ModelDomain, Point, WirtingerPolynomial};
use common::*;
use proptest::prelude::*;

/// Root of `τ ↦ ‖Q(τ ·)‖ − ε` by bisection after geometric bracketing.
fn tau_by_bisection(q: &WirtingerPolynomial, eps: f64) -> f64 {
    let f = |t: f64| q.dilate(t).coefficient_norm() - eps;
    let (mut lo, mut hi) = (eps.min(1.0), eps.max(1.0));
    while f(lo) > 0.0 {
        lo *= 0.5;
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn step_case() -> impl Strategy<Value = (ModelDomain, ScalingStep)> {
    model_domain()
        .prop_flat_map(|d| (Just(d.clone()), interior_point(d)))
        .prop_map(|(d, eta)| {
            let s = build_step(&d, &eta).unwrap();
            (d, s)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn base_point_goes_to_minus_one((_d, s) in step_case()) {
        prop_assert_eq!(s.apply(&s.eta), Point::from_reals(0.0, 0.0, -1.0, 0.0));
    }

    #[test]
    fn rescaled_polynomial_is_normalized((_d, s) in step_case()) {
        prop_assert_eq!(s.pn.coefficient_norm(), 1.0);
        prop_assert!(s.q.harmonic_part().is_zero());
        prop_assert_eq!(s.q.constant_term(), c(0.0, 0.0));
        prop_assert!(s.rescaled_domain().is_ok());
    }

    #[test]
    fn tau_matches_bisection((_d, s) in step_case()) {
        let b = tau_by_bisection(&s.q, s.epsilon);
        prop_assert!(close(s.tau, b, 1e-12), "closed form {} vs bisection {}", s.tau, b);
    }

    #[test]
    fn defining_function_transforms_by_epsilon(
        (d, s) in step_case(),
        pts in proptest::collection::vec((complex(2.0), -3.0..3.0f64, -2.0..2.0f64), 8),
    ) {
        let target = s.rescaled_domain().unwrap();
        for (z, rw, iw) in pts {
            let p = Point::new(z, c(rw, iw));
            let lhs = target.defining_value(&s.apply(&p));
            let rhs = d.defining_value(&p) / s.epsilon;
            let scale = (p.w.re.abs() + eval_scale(d.polynomial(), z) + s.eta.w.norm() + eval_scale(d.polynomial(), s.eta.z)) / s.epsilon;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn metric_is_transported((d, s) in step_case(), v in tangent(), z in complex(2.0), ld in -4.0..2.0f64) {
        let p = Point::new(z, c(-ld.exp() - d.polynomial().evaluate(z), 0.3));
        let target = s.rescaled_domain().unwrap();
        let a = d.catlin_metric(&p, &v).unwrap();
        let b = target.catlin_metric(&s.apply(&p), &s.differential(&p, &v)).unwrap();
        prop_assert!(close(a, b, 1e-10), "{} vs {}", a, b);
    }

    #[test]
    fn inverse_undoes_forward((_d, s) in step_case(), z in complex(2.0), w in complex(3.0)) {
        let p = Point::new(z, w);
        let back = s.invert(&s.apply(&p));
        let scale = 1.0 + p.w.norm() + s.eta.w.norm() + s.epsilon + (1.0 + z.norm()).powi(4) * 20.0;
        prop_assert!((back.z - p.z).norm() <= 1e-12 * (1.0 + z.norm() + s.eta.z.norm()));
        prop_assert!((back.w - p.w).norm() <= 1e-12 * scale);
    }

    #[test]
    fn canonical_form_holds((d, s) in step_case()) {
        let r = rescaled_defining(&d, &s).unwrap();
        prop_assert_eq!(r.w_coefficient, 1.0);
        prop_assert!(r.residual <= 1e-12);
    }

    #[test]
    fn infinity_scaling_coefficients(p in model_poly(), e in 0u32..6) {
        let d = ModelDomain::new(p).unwrap();
        let n = 2f64.powi(e as i32);
        let out = scale_at_infinity(&d, n).unwrap();
        let m = d.degree();
        for ((j, k), a) in d.polynomial().terms() {
            // powers of two make the rescaling exact, so undoing it must too
            prop_assert_eq!(out.coefficient(j, k) * n.powi((m - j - k) as i32), a);
        }
        prop_assert_eq!(out.homogeneous_part(m), d.polynomial().homogeneous_part(m));
    }

    #[test]
    fn infinity_scaling_general_n(p in model_poly(), n in 1.0..1e4f64) {
        let d = ModelDomain::new(p).unwrap();
        let out = scale_at_infinity(&d, n).unwrap();
        let m = d.degree() as i32;
        for ((j, k), a) in d.polynomial().terms() {
            let want = a * n.powi(j as i32 + k as i32 - m);
            prop_assert!((out.coefficient(j, k) - want).norm() <= 4.0 * f64::EPSILON * want.norm());
        }
    }
}

#[test]
fn tau_is_monotone_in_depth() {
    for d in [ModelDomain::thullen(1), ModelDomain::thullen(2), ModelDomain::new(WirtingerPolynomial::from_terms([
        ((1, 1), c(1.0, 0.0)),
        ((2, 2), c(3.0, 0.0)),
        ((2, 1), c(0.5, 0.5)),
        ((1, 2), c(0.5, -0.5)),
    ])).unwrap()] {
        let mut last = 0.0;
        for i in 1..200 {
            let t = 1e-4 * 1.1f64.powi(i);
            let s = build_step(&d, &Point::from_reals(0.0, 0.0, -t, 0.0)).unwrap();
            assert!(s.tau >= last);
            last = s.tau;
        }
    }
}

#[test]
fn tau_rejects_nonpositive_epsilon() {
    assert!(normalizing_tau(&WirtingerPolynomial::thullen(1), 0.0).is_err());
    assert!(normalizing_tau(&WirtingerPolynomial::zero(), 1.0).is_err());
}
