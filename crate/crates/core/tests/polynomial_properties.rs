mod common;

use catlin_core::WirtingerPolynomial;
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn fd_wirtinger(p: &WirtingerPolynomial, z: Complex64, conj: bool) -> Complex64 {
    let h = 1e-5;
    let dx = (eval_oracle(p, z + c(h, 0.0)) - eval_oracle(p, z - c(h, 0.0))) / (2.0 * h);
    let dy = (eval_oracle(p, z + c(0.0, h)) - eval_oracle(p, z - c(0.0, h))) / (2.0 * h);
    let i = c(0.0, 1.0);
    if conj {
        0.5 * (dx + i * dy)
    } else {
        0.5 * (dx - i * dy)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hermitian_values_are_real(p in hermitian_poly(6), z in complex(2.0)) {
        let v = p.evaluate_complex(z);
        prop_assert!(v.im.abs() <= 1e-12 * eval_scale(&p, z));
        prop_assert!(close(p.evaluate(z), v.re, 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn evaluation_matches_term_by_term_oracle(p in any_poly(7), z in complex(2.0)) {
        let tol = 1e-13 * eval_scale(&p, z);
        prop_assert!((p.evaluate_complex(z) - eval_oracle(&p, z)).norm() <= tol);
    }

    #[test]
    fn recenter_is_translation(p in hermitian_poly(6), zeta in complex(1.5), zs in proptest::collection::vec(complex(1.5), 64)) {
        let r = p.recenter(zeta);
        prop_assert!(r.is_hermitian(1e-12));
        for z in zs {
            let want = eval_oracle(&p, zeta + z);
            let tol = 1e-12 * eval_scale(&p, c(zeta.norm() + z.norm(), 0.0));
            prop_assert!((r.evaluate_complex(z) - want).norm() <= tol);
        }
    }

    #[test]
    fn dilation_rescales_argument(p in any_poly(6), tau in 0.1..3.0f64, z in complex(1.5)) {
        let want = eval_oracle(&p, z * tau);
        prop_assert!((p.dilate(tau).evaluate_complex(z) - want).norm() <= 1e-12 * eval_scale(&p, z * tau));
    }

    #[test]
    fn mixed_derivatives_commute(p in any_poly(7)) {
        let a = p.wirtinger_derivative(1, 0).wirtinger_derivative(0, 1);
        let b = p.wirtinger_derivative(0, 1).wirtinger_derivative(1, 0);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &p.wirtinger_derivative(1, 1));
    }

    #[test]
    fn higher_derivatives_are_iterated_first_derivatives(p in any_poly(7), j in 0u32..4, k in 0u32..4) {
        let mut q = p.clone();
        for _ in 0..j {
            q = q.wirtinger_derivative(1, 0);
        }
        for _ in 0..k {
            q = q.wirtinger_derivative(0, 1);
        }
        let direct = p.wirtinger_derivative(j, k);
        prop_assert!((&direct - &q).coefficient_norm() <= 1e-12 * (1.0 + direct.coefficient_norm()));
    }

    #[test]
    fn first_derivatives_match_finite_differences(p in any_poly(5), z in complex(1.5)) {
        let scale = eval_scale(&p, z);
        for conj in [false, true] {
            let d = if conj { p.wirtinger_derivative(0, 1) } else { p.wirtinger_derivative(1, 0) };
            prop_assert!((d.evaluate_complex(z) - fd_wirtinger(&p, z, conj)).norm() <= 1e-7 * scale);
        }
    }

    #[test]
    fn conjugate_derivative_pairing(p in hermitian_poly(6), z in complex(2.0), j in 0u32..4, k in 0u32..4) {
        let a = p.wirtinger_derivative(j, k).evaluate_complex(z).conj();
        let b = p.wirtinger_derivative(k, j).evaluate_complex(z);
        let scale = 1.0 + p.wirtinger_derivative(j, k).terms().map(|(_, a)| a.norm()).sum::<f64>()
            * (1.0 + z.norm()).powi(6);
        prop_assert!((a - b).norm() <= 1e-13 * scale);
    }

    #[test]
    fn laplacian_matches_five_point_stencil(p in hermitian_poly(6), z in complex(1.5)) {
        let h = 1e-3;
        let f = |w: Complex64| eval_oracle(&p, w).re;
        let stencil = (f(z + c(h, 0.0)) + f(z - c(h, 0.0)) + f(z + c(0.0, h)) + f(z - c(0.0, h)) - 4.0 * f(z)) / (h * h);
        prop_assert!((p.laplacian(z) - stencil).abs() <= 1e-4 * eval_scale(&p, z + c(1.0, 0.0)) * 36.0);
    }

    #[test]
    fn parts_reassemble(p in any_poly(7)) {
        let constant = WirtingerPolynomial::monomial(0, 0, p.constant_term());
        let sum = &(&p.harmonic_part() + &p.mixed_part()) + &constant;
        prop_assert_eq!(&sum, &p);
        let mut acc = WirtingerPolynomial::zero();
        for d in 0..=p.degree() {
            acc = &acc + &p.homogeneous_part(d);
        }
        prop_assert_eq!(&acc, &p);
        prop_assert!(p.mixed_part().harmonic_part().is_zero());
    }

    #[test]
    fn norm_axioms(p in any_poly(6), q in any_poly(6), s in -5.0..5.0f64) {
        let slack = 1.0 + 4.0 * f64::EPSILON;
        prop_assert!((&p + &q).coefficient_norm() <= (p.coefficient_norm() + q.coefficient_norm()) * slack);
        prop_assert!(close(p.scale(s).coefficient_norm(), s.abs() * p.coefficient_norm(), 4.0 * f64::EPSILON));
        prop_assert_eq!(p.coefficient_norm() == 0.0, p.is_zero());
    }

    #[test]
    fn json_round_trip(p in hermitian_poly(6)) {
        let text = serde_json::to_string(&p).unwrap();
        let back = WirtingerPolynomial::from_json_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn falling_factorial_rule_on_monomials() {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    for j in 0..6u32 {
        for k in 0..6u32 {
            let m = WirtingerPolynomial::monomial(j, k, c(1.5, -0.5));
            for p in 0..=j {
                for q in 0..=k {
                    let want = c(1.5, -0.5) * (fact(j) / fact(j - p)) * (fact(k) / fact(k - q));
                    assert_eq!(m.wirtinger_derivative(p, q).coefficient(j - p, k - q), want);
                }
            }
            assert!(m.wirtinger_derivative(j + 1, 0).is_zero());
        }
    }
}

#[test]
fn non_hermitian_json_names_bidegree() {
    let text = r#"{"terms":[{"j":2,"k":1,"re":1.0,"im":0.0}]}"#;
    let err = WirtingerPolynomial::from_json_str(text).unwrap_err();
    assert!(matches!(err, catlin_core::Error::NonHermitian { j: 2, k: 1 } | catlin_core::Error::NonHermitian { j: 1, k: 2 }));
}
