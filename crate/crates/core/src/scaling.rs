//! Scaling of model domains near an interior point, and scaling at infinity.
//!
//! For `η ∈ Ω_P` put `ε = -r_P(η)` and expand `P(η₁ + u) = c₀₀ + Σ_k 2 Re(c_{k0} u^k) + Q(u)`
//! with `Q` the mixed part. The polynomial automorphism
//!
//! ```text
//! φ(z, w) = (z - η₁, w - η₂ - ε - Σ_{k≥1} d_k (z - η₁)^k),   d_k = -2 c_{k0}
//! δ(z, w) = (z / τ, w / ε)
//! ψ = δ ∘ φ
//! ```
//!
//! sends `η` to `(0, -1)` and `Ω_P` onto `{Re w + Q(τ z)/ε < 0}`, with
//! `r_P = ε · r_n ∘ ψ`. The dilation `τ` is fixed by `‖Q(τ ·)‖ = ε` in the
//! max-coefficient norm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{ModelDomain, Point, Tangent};
use crate::error::{Error, Result};
use crate::polynomial::{Powers, WirtingerPolynomial};

/// Tolerance on the residual of the rescaled defining function.
pub const CANONICAL_TOL: f64 = 1e-12;

/// One rescaling of `Ω_P` around an interior point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStep {
    pub eta: Point,
    pub epsilon: f64,
    /// `shear[0] = 1` is the coefficient of `w`; `shear[k]` for `k ≥ 1` is `d_k`.
    pub shear: Vec<Complex64>,
    pub tau: f64,
    /// Mixed part of `P(η₁ + ·)`.
    pub q: WirtingerPolynomial,
    /// `Q(τ ·)` normalized to unit coefficient norm.
    pub pn: WirtingerPolynomial,
}

/// Smallest `τ > 0` with `‖Q(τ ·)‖ = ε`, where `‖·‖` is the max-coefficient norm.
///
/// Each term contributes `|a| τ^{j+k}`, so the norm is a strictly increasing
/// maximum of power functions and the root is the smallest per-term root.
pub fn normalizing_tau(q: &WirtingerPolynomial, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    q.terms()
        .filter(|((j, k), _)| j + k > 0)
        .map(|((j, k), c)| (epsilon / c.norm()).powf(1.0 / f64::from(j + k)))
        .min_by(f64::total_cmp)
        .ok_or(Error::DegenerateStep)
}

/// Builds the rescaling around the interior point `eta`.
pub fn build_step(domain: &ModelDomain, eta: &Point) -> Result<ScalingStep> {
    let epsilon = domain.depth(eta)?;
    let recentered = domain.polynomial().recenter(eta.z);
    let q = recentered.mixed_part();
    if q.is_zero() {
        return Err(Error::DegenerateStep);
    }
    let m = recentered.degree();
    let mut shear = vec![Complex64::new(1.0, 0.0)];
    shear.extend((1..=m).map(|k| -2.0 * recentered.coefficient(k, 0)));
    let tau = normalizing_tau(&q, epsilon)?;
    let dilated = q.dilate(tau);
    let norm = dilated.coefficient_norm();
    let pn = WirtingerPolynomial::from_terms(dilated.terms().map(|(key, c)| (key, c / norm)));
    Ok(ScalingStep { eta: *eta, epsilon, shear, tau, q, pn })
}

impl ScalingStep {
    /// `Σ_{k≥1} d_k u^k` and its derivative in `u`.
    fn shear_poly(&self, u: Complex64) -> (Complex64, Complex64) {
        let pw = Powers::new(u, self.shear.len() as u32);
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for (k, d) in self.shear.iter().enumerate().skip(1) {
            value += d * pw.term(k, 0);
            deriv += d * (k as f64) * pw.term(k - 1, 0);
        }
        (value, deriv)
    }

    /// `ψ(p)`.
    pub fn apply(&self, p: &Point) -> Point {
        let u = p.z - self.eta.z;
        let (s, _) = self.shear_poly(u);
        let w = p.w - self.eta.w - self.epsilon - s;
        Point::new(u / self.tau, w / self.epsilon)
    }

    /// `ψ⁻¹(p)`.
    pub fn invert(&self, p: &Point) -> Point {
        let u = p.z * self.tau;
        let (s, _) = self.shear_poly(u);
        Point::new(self.eta.z + u, p.w * self.epsilon + self.eta.w + self.epsilon + s)
    }

    /// `dψ_p(v)`.
    pub fn differential(&self, p: &Point, v: &Tangent) -> Tangent {
        let (_, ds) = self.shear_poly(p.z - self.eta.z);
        Tangent::new(v.x / self.tau, (v.y - ds * v.x) / self.epsilon)
    }

    /// The target domain `{Re w + P_n(z) < 0}`.
    pub fn rescaled_domain(&self) -> Result<ModelDomain> {
        ModelDomain::new(self.pn.clone())
    }
}

pub fn apply_automorphism(step: &ScalingStep, p: &Point) -> Point {
    step.apply(p)
}

/// `r_P ∘ ψ⁻¹ / ε` written as `w_coefficient · Re w + z_part(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledDefining {
    pub w_coefficient: f64,
    pub z_part: WirtingerPolynomial,
    /// Max-coefficient distance between `z_part` and `P_n`, relative to the
    /// size of the quantities that cancel.
    pub residual: f64,
}

/// Substitutes `ψ⁻¹` into `r_P` symbolically and checks the result is
/// `Re w + P_n(z)`.
pub fn rescaled_defining(domain: &ModelDomain, step: &ScalingStep) -> Result<RescaledDefining> {
    let eps = step.epsilon;
    let tau = step.tau;
    let recentered = domain.polynomial().recenter(step.eta.z);
    // Re(ε w + η₂ + ε + Σ d_k τ^k z^k) + P(η₁ + τ z)
    let mut terms: Vec<((u32, u32), Complex64)> = recentered.dilate(tau).terms().collect();
    let offset = step.eta.w.re + eps;
    terms.push(((0, 0), Complex64::new(offset, 0.0)));
    for (k, d) in step.shear.iter().enumerate().skip(1) {
        let c = d * tau.powi(k as i32) * 0.5;
        terms.push(((k as u32, 0), c));
        terms.push(((0, k as u32), c.conj()));
    }
    let z_part = WirtingerPolynomial::from_terms(terms).scale(1.0 / eps);
    let w_coefficient = eps / eps;
    let scale = 1.0 + (offset.abs() + recentered.constant_term().norm()) / eps;
    let residual = (&z_part - &step.pn).coefficient_norm() / scale;
    if w_coefficient != 1.0 || !(residual <= CANONICAL_TOL) {
        return Err(Error::CanonicalFormViolation { residual });
    }
    Ok(RescaledDefining { w_coefficient, z_part, residual })
}

/// `n^{-m} P(n z)`: the coefficient of bidegree `(j, k)` is multiplied by `n^{j+k-m}`.
pub fn scale_at_infinity(domain: &ModelDomain, n: f64) -> Result<WirtingerPolynomial> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!("scale parameter must be >= 1, got {n}")));
    }
    let m = domain.degree();
    Ok(WirtingerPolynomial::from_terms(
        domain
            .polynomial()
            .terms()
            .map(|((j, k), c)| ((j, k), c / n.powi((m - j - k) as i32))),
    ))
}

/// Limit of the rescaled polynomials for points approaching the boundary
/// vertically over `z0`: the lowest-degree homogeneous part of the mixed part
/// of `P(z0 + ·)`, normalized to unit coefficient norm.
pub fn scaling_limit(domain: &ModelDomain, z0: Complex64) -> Result<WirtingerPolynomial> {
    let q = domain.polynomial().recenter(z0).mixed_part();
    let low = q.terms().map(|((j, k), _)| j + k).min().ok_or(Error::DegenerateStep)?;
    let h = q.homogeneous_part(low);
    let norm = h.coefficient_norm();
    Ok(WirtingerPolynomial::from_terms(h.terms().map(|(key, c)| (key, c / norm))))
}

/// One row of a scaling sequence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: f64,
    pub epsilon: f64,
    pub tau: f64,
    /// Max coefficient deviation of `P_n` from the limit polynomial.
    pub deviation: f64,
}

/// Rescales at `η_n = (z0, -P(z0) - 1/n)` for each `n` and measures the
/// distance of `P_n` to [`scaling_limit`].
pub fn scaling_sequence(domain: &ModelDomain, z0: Complex64, ns: &[f64]) -> Result<Vec<ScalingRow>> {
    let limit = scaling_limit(domain, z0)?;
    let foot = domain.boundary_point(z0, 0.0);
    ns.iter()
        .map(|&n| {
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::InvalidParameter(format!("sequence index must be positive, got {n}")));
            }
            let eta = Point::new(foot.z, foot.w - 1.0 / n);
            let step = build_step(domain, &eta)?;
            let deviation = (&step.pn - &limit).coefficient_norm();
            Ok(ScalingRow { n, epsilon: step.epsilon, tau: step.tau, deviation })
        })
        .collect()
}
