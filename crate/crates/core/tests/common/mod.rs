#![allow(dead_code)]

use catlin_core::{ModelDomain, Point, Tangent, WirtingerPolynomial};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complex(radius: f64) -> impl Strategy<Value = Complex64> {
    (-radius..radius, -radius..radius).prop_map(|(a, b)| c(a, b))
}

/// Hermitian-symmetric polynomial of degree at most `max_degree`.
pub fn hermitian_poly(max_degree: u32) -> impl Strategy<Value = WirtingerPolynomial> {
    let term = (0..=max_degree, 0..=max_degree, -2.0..2.0f64, -2.0..2.0f64)
        .prop_filter("degree bound", move |(j, k, _, _)| j + k <= max_degree);
    proptest::collection::vec(term, 1..6).prop_map(|terms| {
        let mut all = Vec::new();
        for (j, k, re, im) in terms {
            if j == k {
                all.push(((j, k), c(re, 0.0)));
            } else {
                all.push(((j, k), c(re, im)));
                all.push(((k, j), c(re, -im)));
            }
        }
        WirtingerPolynomial::from_terms(all)
    })
}

/// Arbitrary (not necessarily Hermitian) polynomial.
pub fn any_poly(max_degree: u32) -> impl Strategy<Value = WirtingerPolynomial> {
    let term = (0..=max_degree, 0..=max_degree, -2.0..2.0f64, -2.0..2.0f64)
        .prop_filter("degree bound", move |(j, k, _, _)| j + k <= max_degree);
    proptest::collection::vec(term, 0..6)
        .prop_map(|terms| WirtingerPolynomial::from_terms(terms.into_iter().map(|(j, k, a, b)| ((j, k), c(a, b)))))
}

/// `a|z|² + b|z|⁴ + γ z²z̄ + γ̄ zz̄²` with `|γ|² ≤ 0.81 ab`, whose Laplacian
/// `4a + 16b|z|² + 32 Re(γ̄ z)` is nonnegative.
pub fn model_poly() -> impl Strategy<Value = WirtingerPolynomial> {
    (0.1..3.0f64, 0.1..3.0f64, 0.0..0.9f64, 0.0..std::f64::consts::TAU).prop_map(|(a, b, s, th)| {
        let g = Complex64::from_polar(s * (a * b).sqrt(), th);
        WirtingerPolynomial::from_terms([
            ((1, 1), c(a, 0.0)),
            ((2, 2), c(b, 0.0)),
            ((2, 1), g),
            ((1, 2), g.conj()),
        ])
    })
}

pub fn model_domain() -> impl Strategy<Value = ModelDomain> {
    model_poly().prop_map(|p| ModelDomain::new(p).expect("generated polynomial is a model polynomial"))
}

/// Interior point with `z` in `[-2, 2]²` and `log |r| ∈ [-4, 2]`.
pub fn interior_point(domain: ModelDomain) -> impl Strategy<Value = Point> {
    (complex(2.0), -4.0..2.0f64, -3.0..3.0f64).prop_map(move |(z, ld, im)| {
        Point::new(z, c(-ld.exp() - domain.polynomial().evaluate(z), im))
    })
}

pub fn tangent() -> impl Strategy<Value = Tangent> {
    (complex(3.0), complex(3.0)).prop_map(|(x, y)| Tangent::new(x, y))
}

/// `z^j z̄^k` by repeated multiplication.
pub fn monomial_value(z: Complex64, j: u32, k: u32) -> Complex64 {
    let mut v = c(1.0, 0.0);
    for _ in 0..j {
        v *= z;
    }
    for _ in 0..k {
        v *= z.conj();
    }
    v
}

/// Term-by-term evaluation, independent of the library's power tables.
pub fn eval_oracle(p: &WirtingerPolynomial, z: Complex64) -> Complex64 {
    p.terms().map(|((j, k), a)| a * monomial_value(z, j, k)).sum()
}

/// Scale of the terms summed by `eval_oracle`, for relative tolerances.
pub fn eval_scale(p: &WirtingerPolynomial, z: Complex64) -> f64 {
    1.0 + p.terms().map(|((j, k), a)| a.norm() * z.norm().powi((j + k) as i32)).sum::<f64>()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || a == b
}

/// Condition number of `Re w + P(z)` at `p`: cancellation in that sum is the
/// dominant source of rounding in anything divided by the depth.
pub fn depth_condition(d: &ModelDomain, p: &Point) -> f64 {
    (p.w.re.abs() + eval_scale(d.polynomial(), p.z)) / d.defining_value(p).abs()
}
